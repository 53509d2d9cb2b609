// Acceptance gate: one [PASS]/[FAIL] line per criterion id given on the
// command line (all nine when none are given). Exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "blocks_ref.hpp"
#include "drn/blocks.hpp"
#include "drn/cli.hpp"
#include "drn/fusion.hpp"
#include "drn/losses.hpp"
#include "drn/metrics.hpp"
#include "drn/training.hpp"
#include "gradcheck.hpp"
#include "mertens_ref.hpp"
#include "metrics_ref.hpp"
#include "scratch.hpp"

using namespace drn;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Report {
public:
    void check(bool ok, const std::string &what)
    {
        if (!ok) {
            pass_ = false;
            failures_ += (failures_.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string &s) { notes_ += (notes_.empty() ? "" : ", ") + s; }
    Outcome done() const { return {pass_, pass_ ? notes_ : failures_ + (notes_.empty() ? "" : " | " + notes_)}; }

private:
    bool pass_ = true;
    std::string failures_, notes_;
};

std::string fmt(double v, int prec = 3)
{
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

std::string sci(double v)
{
    std::ostringstream s;
    s.precision(2);
    s << std::scientific << v;
    return s.str();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void progress(const std::string &msg) { std::cerr << "  .. " << msg << std::endl; }

void randomize(nn::Module &m, uint64_t seed, double scale = 0.5)
{
    torch::manual_seed(seed);
    torch::NoGradGuard g;
    for (auto &p : m.parameters()) p.uniform_(-scale, scale);
}

FeatureMap feat(std::vector<int64_t> shape, uint64_t seed)
{
    torch::manual_seed(seed);
    return FeatureMap(torch::randn(shape));
}

// ---- 1: block oracles ----

Outcome block_oracles()
{
    const auto t0 = Clock::now();
    Report r;
    double worst = 0.0;
    for (int64_t c : {1, 2}) {
        for (auto [l1, l2] : {std::pair{1.0, 1.0}, std::pair{0.5, 1.5}}) {
            DBPBlock dbp(BackProjectionOptions(c).lambda1(l1).lambda2(l2));
            randomize(*dbp, 100 + c);
            auto x = feat({c, 4, 4}, 200 + c);
            worst = std::max(worst, oracle::max_abs_diff(oracle::dbp(dbp, oracle::from_tensor(x.data())),
                                                         dbp_forward(dbp, x).data()));
            UBPBlock ubp(BackProjectionOptions(c).lambda1(l1).lambda2(l2));
            randomize(*ubp, 300 + c);
            auto z = feat({2 * c, 2, 2}, 400 + c);
            worst = std::max(worst, oracle::max_abs_diff(oracle::ubp(ubp, oracle::from_tensor(z.data())),
                                                         ubp_forward(ubp, z).data()));
        }
        ResidualBlock rb(c);
        randomize(*rb, 500 + c);
        auto x = feat({c, 4, 4}, 600 + c);
        worst = std::max(worst, oracle::max_abs_diff(oracle::resblock(rb, oracle::from_tensor(x.data())),
                                                     resblock_forward(rb, x).data()));
    }
    RecalibrationBlock rc(2, 1);
    randomize(*rc, 700);
    auto x = feat({2, 4, 4}, 701);
    worst = std::max(worst, oracle::max_abs_diff(oracle::recalibrate(rc, oracle::from_tensor(x.data())),
                                                 recalibrate(rc, x).data()));
    const double secs = seconds_since(t0);
    r.check(worst <= 1e-5, "max abs error " + sci(worst) + " > 1e-5");
    r.check(secs < 60, "took " + fmt(secs) + " s");
    r.note("max abs error " + sci(worst));
    r.note(fmt(secs, 2) + " s");
    return r.done();
}

// ---- 2: gradient suite ----

Outcome gradient_suite()
{
    const auto t0 = Clock::now();
    Report r;
    double worst = 0.0;
    std::string worst_name;
    auto record = [&](const std::string &what, const oracle::GradReport &g) {
        if (g.worst > worst) {
            worst = g.worst;
            worst_name = what + ":" + g.worst_name;
        }
    };
    auto module_check = [&](const std::string &what, nn::Module &m, torch::Tensor x,
                            const std::function<torch::Tensor(const torch::Tensor &)> &fwd) {
        m.to(torch::kFloat64);
        x = x.to(torch::kFloat64).requires_grad_(true);
        torch::manual_seed(99);
        auto probe = torch::randn_like(fwd(x.detach()));
        record(what, oracle::gradcheck([&] { return (fwd(x) * probe).sum(); }, oracle::leaves_of(m, {{"input", x}})));
    };

    {
        DBPBlock b(BackProjectionOptions(2));
        randomize(*b, 1);
        module_check("dbp", *b, torch::randn({1, 2, 4, 4}), [&](const torch::Tensor &t) { return b->forward(t); });
    }
    {
        UBPBlock b(BackProjectionOptions(2));
        randomize(*b, 2);
        module_check("ubp", *b, torch::randn({1, 4, 2, 2}), [&](const torch::Tensor &t) { return b->forward(t); });
    }
    {
        ResidualBlock b(2);
        randomize(*b, 3);
        module_check("resblock", *b, torch::randn({1, 2, 4, 4}), [&](const torch::Tensor &t) { return b->forward(t); });
    }
    {
        MultiScalePerception b(4);
        randomize(*b, 4);
        module_check("multiscale", *b, torch::randn({1, 4, 4, 4}), [&](const torch::Tensor &t) { return b->forward(t); });
    }
    {
        RecalibrationBlock b(4);
        randomize(*b, 5);
        module_check("recalibration", *b, torch::randn({1, 4, 2, 2}),
                     [&](const torch::Tensor &t) { return b->forward(t); });
    }
    {
        // Samples at least 0.05 from the threshold 0.4.
        auto x = torch::tensor({0.1, 0.2, 0.5, 0.7, 0.9, 0.25, 0.33, 0.47}, torch::kFloat64).requires_grad_(true);
        auto w = torch::arange(1, 9, torch::kFloat64);
        record("shadow_rectify", oracle::gradcheck([&] { return (shadow_rectify(x, 0.4) * w).sum(); }, {{"input", x}}));
    }

    // Losses, float64, inputs pushed off the |.| and min kinks.
    const auto opts = torch::TensorOptions().dtype(torch::kFloat64);
    torch::manual_seed(6);
    LossWeights lw;
    const double kink = 2 * lw.shadow_alpha - 1;
    auto x = torch::rand({1, 3, 32, 32}, opts) * 2 - 1;
    auto y = torch::rand({1, 3, 32, 32}, opts) * 2 - 1;
    auto gen = torch::rand({1, 3, 32, 32}, opts) * 2 - 1;
    gen = torch::where((gen - kink).abs() < 0.01, gen + 0.02, gen);
    gen = torch::where((gen - y).abs() < 0.01, gen + 0.02, gen).requires_grad_(true);
    PatchDiscriminator d(4), ds(4);
    d->to(torch::kFloat64);
    ds->to(torch::kFloat64);
    auto real_logits = (torch::randn({1, 1, 4, 4}, opts) * 2).requires_grad_(true);
    auto fake_logits = (torch::randn({1, 1, 4, 4}, opts) * 2).requires_grad_(true);
    record("adv_loss_d", oracle::gradcheck([&] { return adv_loss_d(real_logits, fake_logits); },
                                           {{"real", real_logits}, {"fake", fake_logits}}));
    record("adv_loss_g", oracle::gradcheck([&] { return adv_loss_g(fake_logits); }, {{"fake", fake_logits}}));
    record("scene_objective",
           oracle::gradcheck([&] { return scene_objective(gen, y, d, x, lw).total; }, {{"generated", gen}}));
    record("shadow_objective",
           oracle::gradcheck([&] { return shadow_objective(gen, y, d, &ds, x, lw).total; }, {{"generated", gen}}));
    record("shadow_objective.disc_shad",
           oracle::gradcheck([&] { return shadow_objective(gen.detach(), y, d, &ds, x, lw).total; },
                             oracle::leaves_of(*ds)));
    FixedFeatureExtractor fx;
    fx->to(torch::kFloat64);
    auto est = torch::rand({1, 3, 16, 16}, opts) * 2 - 1;
    auto tgt = torch::rand({1, 3, 16, 16}, opts) * 2 - 1;
    est = torch::where((est - tgt).abs() < 0.01, est + 0.02, est).requires_grad_(true);
    record("perceptual_l1_loss",
           oracle::gradcheck(
               [&] { return perceptual_l1_loss(est, tgt, [&](const torch::Tensor &t) { return fx->forward(t); }, 0.5); },
               {{"estimate", est}}));

    const double secs = seconds_since(t0);
    r.check(worst <= 1e-2, "worst relative error " + sci(worst) + " at " + worst_name);
    r.check(secs < 300, "took " + fmt(secs) + " s");
    r.note("worst relative error " + sci(worst) + " (" + worst_name + ")");
    r.note(fmt(secs, 2) + " s");
    return r.done();
}

// ---- 3: fusion oracle ----

Outcome fusion_oracle()
{
    const auto t0 = Clock::now();
    Report r;
    const auto grid = light_grid();
    auto bundle = [&](const std::vector<ImageTensor> &images) {
        SceneBundle b{"acceptance", {}};
        for (size_t i = 0; i < images.size(); ++i) b.images.emplace_back(grid[i], images[i]);
        return b;
    };
    auto diff = [](const oracle::Volume &ref, const ImageTensor &img) { return oracle::max_abs_diff(ref, img.data()); };

    torch::manual_seed(8);
    const ImageTensor img(torch::rand({3, 32, 32}), Range::unit);
    const double same = (exposure_fuse(bundle({img, img, img})).data() - img.data()).abs().max().item<double>();
    const double single = (exposure_fuse(bundle({img})).data() - img.data()).abs().max().item<double>();

    using torch::indexing::Slice;
    auto a = torch::full({3, 16, 16}, 0.05f);
    a.index_put_({Slice(), Slice(4, 12), Slice(4, 12)}, torch::tensor({0.6f, 0.5f, 0.4f}).view({3, 1, 1}));
    auto b = torch::full({3, 16, 16}, 0.2f);
    b.index_put_({Slice(), Slice(5, 11), Slice(5, 11)},
                 torch::tensor({0.55f, 0.45f, 0.5f}).view({3, 1, 1}) + 0.05f * torch::rand({3, 6, 6}));
    const ImageTensor ia(a, Range::unit), ib(b, Range::unit);
    const std::vector<oracle::Volume> vols{oracle::from_tensor(a), oracle::from_tensor(b)};
    double two = diff(oracle::mertens_fuse(vols, default_pyramid_levels(16, 16)), exposure_fuse(bundle({ia, ib})));
    for (int levels : {2, 3, 4}) two = std::max(two, diff(oracle::mertens_fuse(vols, levels), exposure_fuse(bundle({ia, ib}), levels)));
    const double flat = diff(oracle::weighted_average(vols), exposure_fuse(bundle({ia, ib}), 1));

    bool in_range = true;
    for (uint64_t s = 0; s < 10; ++s) {
        torch::manual_seed(900 + s);
        std::vector<ImageTensor> imgs;
        for (int k = 0; k < 4; ++k) imgs.emplace_back(torch::rand({3, 32, 32}).pow(1 + k), Range::unit);
        auto f = exposure_fuse(bundle(imgs)).data();
        in_range = in_range && f.min().item<float>() >= 0.0f && f.max().item<float>() <= 1.0f;
    }
    const double secs = seconds_since(t0);
    r.check(same <= 1e-5, "identical-image error " + sci(same));
    r.check(single <= 1e-5, "single-image error " + sci(single));
    r.check(two <= 1e-5, "two-image pyramid error " + sci(two));
    r.check(flat <= 1e-5, "two-image single-level error " + sci(flat));
    r.check(in_range, "fused values left [0,1]");
    r.check(secs < 60, "took " + fmt(secs) + " s");
    r.note("identical " + sci(same) + ", single " + sci(single) + ", two-image " + sci(std::max(two, flat)));
    r.note(fmt(secs, 2) + " s");
    return r.done();
}

// ---- 4: metric oracles ----

Outcome metric_oracles()
{
    const auto t0 = Clock::now();
    Report r;
    auto zero = torch::zeros({3, 16, 16}, torch::kFloat64);
    const double p20 = psnr(zero, zero + 0.1);
    torch::manual_seed(10);
    auto a = torch::rand({3, 16, 16}, torch::kFloat64);
    const double self = ssim(a, a);
    double worst_p = 0.0, worst_s = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        auto x = torch::rand({3, 16, 16}, torch::kFloat64);
        auto y = (x + 0.1 * torch::randn_like(x)).clamp(0.0, 1.0);
        const auto vx = oracle::from_tensor(x), vy = oracle::from_tensor(y);
        worst_p = std::max(worst_p, std::abs(psnr(x, y) - oracle::psnr(vx, vy)));
        worst_s = std::max(worst_s, std::abs(ssim(x, y) - oracle::ssim(vx, vy)));
    }
    const double secs = seconds_since(t0);
    r.check(std::abs(p20 - 20.0) <= 1e-9, "closed-form PSNR " + fmt(p20, 15));
    r.check(self == 1.0 || std::abs(self - 1.0) <= 1e-12, "SSIM(a,a) = " + fmt(self, 15));
    r.check(worst_p <= 1e-6, "PSNR oracle error " + sci(worst_p));
    r.check(worst_s <= 1e-6, "SSIM oracle error " + sci(worst_s));
    r.check(secs < 60, "took " + fmt(secs) + " s");
    r.note("PSNR(0,0.1) = " + fmt(p20, 12) + " dB, oracle errors " + sci(worst_p) + " / " + sci(worst_s));
    r.note(fmt(secs, 2) + " s");
    return r.done();
}

// ---- 5: overfit ----

Outcome overfit()
{
    const auto t0 = Clock::now();
    Report r;
    testing::Scratch dir("accept_overfit");
    RenderConfig rc;
    rc.resolution = 64;
    generate_dataset(1, rc, dir.path(), 0, 1.0);
    auto stream = load_pairs(dir.path(), default_target(), Split::all);
    std::vector<RelightPair> pairs;
    const std::set<std::string> pick{"N_2500", "SW_3500", "W_5500", "NE_6500"};
    while (auto p = stream.next()) {
        if (pick.contains(p->input_light.stem())) pairs.push_back(*p);
    }
    const auto data = PairDataset::from_pairs(pairs);

    auto cfg_for = [](Stage stage) {
        StageConfig c;
        c.stage = stage;
        c.seed = 0;
        c.epochs = 2000;
        c.batch_size = 4;
        c.max_iterations = 2000;
        c.net.width_multiplier = 0.5;
        return c;
    };
    struct Tracker {
        double best = INFINITY;
        int64_t reached = -1;
        bool finite = true;
    };
    auto hooks_for = [](const std::string &name, Tracker &t) {
        TrainHooks h;
        h.on_iteration = [&t, name](const IterationLog &e) {
            t.finite = t.finite && std::isfinite(e.loss_g) && (std::isnan(e.loss_d) || std::isfinite(e.loss_d));
            t.best = std::min(t.best, e.l1);
            if (e.iter % 100 == 0) progress(name + " iter " + std::to_string(e.iter) + " l1 " + fmt(e.l1, 4));
            if (e.l1 < 0.05) {
                t.reached = e.iter;
                return false;
            }
            return true;
        };
        return h;
    };

    Tracker ts, tp, tr;
    const auto scene = train_scene(data, cfg_for(Stage::scene), hooks_for("scene", ts)).checkpoint;
    const auto shadow = train_shadow(data, cfg_for(Stage::shadow), hooks_for("shadow", tp)).checkpoint;
    train_render(data, scene, shadow, cfg_for(Stage::render), hooks_for("render", tr));

    const double mins = seconds_since(t0) / 60.0;
    for (auto [name, t] : {std::pair{"scene", &ts}, std::pair{"shadow", &tp}, std::pair{"render", &tr}}) {
        r.check(t->reached > 0, std::string(name) + " best l1 " + fmt(t->best, 4) + " >= 0.05 after 2000 iterations");
        r.check(t->finite, std::string(name) + " produced a non-finite loss");
        r.note(std::string(name) + (t->reached > 0 ? " l1<0.05 at iter " + std::to_string(t->reached)
                                                     : " best l1 " + fmt(t->best, 4)));
    }
    r.check(mins < 30.0, "took " + fmt(mins) + " min");
    r.note(fmt(mins, 3) + " min");
    return r.done();
}

// ---- 6: toy generalization ----

Outcome generalization()
{
    const auto t0 = Clock::now();
    Report r;
    const char *keep = std::getenv("DRN_ACCEPT_WORKDIR");
    std::optional<testing::Scratch> scratch;
    fs::path root;
    if (keep != nullptr) {
        root = keep;
        fs::create_directories(root);
    } else {
        scratch.emplace("accept_generalization");
        root = scratch->path();
    }
    const auto data_dir = root / "data", ck = root / "ckpt";
    fs::create_directories(ck);

    RunConfig run;  // defaults: 64x64, width 1.0, batch 4
    RenderConfig rc;
    rc.resolution = run.get<int64_t>("data.size");
    progress("rendering 220 scenes");
    generate_dataset(220, rc, data_dir, 0, 200.0 / 220.0);
    const auto train = PairDataset::load(data_dir, Split::train);
    const auto val = PairDataset::load(data_dir, Split::val, default_target(), false);
    r.check(val.size() == 20 * 39, "val split has " + std::to_string(val.size()) + " pairs");

    // Budget: one epoch per stage.
    run.set("train.epochs", int64_t{1});
    auto logger = [](const std::string &name) {
        TrainHooks h;
        h.on_iteration = [name](const IterationLog &e) {
            if (e.iter % 100 == 0) progress(name + " iter " + std::to_string(e.iter) + " l1 " + fmt(e.l1, 4));
            return true;
        };
        return h;
    };
    for (Stage s : {Stage::scene, Stage::shadow}) {
        const auto cfg = StageConfig::from_run_config(run, s);
        auto res = s == Stage::scene ? train_scene(train, cfg, logger(to_string(s)))
                                     : train_shadow(train, cfg, logger(to_string(s)));
        res.checkpoint.save(ck / checkpoint_file(s));
    }
    {
        const auto scene = CheckpointBundle::load(ck / checkpoint_file(Stage::scene));
        const auto shadow = CheckpointBundle::load(ck / checkpoint_file(Stage::shadow));
        auto res = train_render(train, scene, shadow, StageConfig::from_run_config(run, Stage::render), logger("render"));
        res.checkpoint.save(ck / checkpoint_file(Stage::render));
    }

    progress("evaluating");
    auto drn_model = load_model(ck, true);
    const auto drn_report = evaluate(drn_model, val, AblationFlags{});
    // Single-stage BPAE row: the shadow-topology BP generator and head trained
    // with the same objective and per-network budget.
    auto bpae_model = load_model(ck, false);
    const auto bpae_report = evaluate(bpae_model, val, AblationFlags::from_label("BPAE"));

    const double drn = drn_report.model.mean_psnr_db, base = drn_report.baseline.mean_psnr_db;
    const double bpae = bpae_report.model.mean_psnr_db;
    const double hours = seconds_since(t0) / 3600.0;
    r.check(drn - base >= 2.0, "DRN " + fmt(drn, 4) + " dB is only " + fmt(drn - base, 3) + " dB over input-copy");
    r.check(drn - bpae >= 0.3, "DRN " + fmt(drn, 4) + " dB is only " + fmt(drn - bpae, 3) + " dB over BPAE");
    r.check(hours <= 12.0, "took " + fmt(hours) + " h");
    r.note("DRN " + fmt(drn, 4) + " dB / SSIM " + fmt(drn_report.model.mean_ssim, 3) + ", BPAE " + fmt(bpae, 4) +
           " dB, input-copy " + fmt(base, 4) + " dB");
    r.note(fmt(hours, 3) + " h");
    return r.done();
}

// ---- 7: ablation rows ----

int cli(const std::vector<std::string> &args, std::string *err = nullptr)
{
    std::ostringstream out, e;
    const int code = run_cli(args, out, e);
    if (err != nullptr) *err = e.str();
    return code;
}

Outcome ablation_rows()
{
    const auto t0 = Clock::now();
    Report r;
    testing::Scratch dir("accept_ablation");
    const auto data = (dir / "data").string();
    r.check(cli({"gen-data", "--out", data, "--scenes", "2", "--size", "32"}) == 0, "gen-data failed");
    const std::vector<std::string> tiny = {"--set", "net.width_multiplier=0.125", "--set", "net.res_blocks=1",
                                           "--set", "train.max_iterations=2", "--set", "train.batch_size=2"};
    for (const char *row : {"Pix2Pix", "ShadAdv", "BPAE", "DRN"}) {
        const auto flags = AblationFlags::from_label(row);
        const auto ck = (dir / row).string();
        auto args = tiny;
        for (auto [key, on] : {std::pair{"ablation.use_shadow_disc", flags.use_shadow_disc},
                               std::pair{"ablation.use_bp_blocks", flags.use_bp_blocks},
                               std::pair{"ablation.two_stage", flags.two_stage}}) {
            args.push_back("--set");
            args.push_back(std::string(key) + "=" + (on ? "true" : "false"));
        }
        std::vector<std::string> stages{"shadow"};
        if (flags.two_stage) stages = {"scene", "shadow", "render"};
        for (const auto &s : stages) {
            std::vector<std::string> cmd{"train", "--stage", s, "--data", data, "--ckpt-dir", ck};
            cmd.insert(cmd.end(), args.begin(), args.end());
            std::string err;
            r.check(cli(cmd, &err) == 0, std::string(row) + " train " + s + ": " + err);
        }
        const auto report = (dir / (std::string(row) + ".json")).string();
        r.check(cli({"eval", "--data", data, "--ckpt-dir", ck, "--report", report}) == 0, std::string(row) + " eval");
        if (!fs::exists(report)) continue;
        const auto j = nlohmann::json::parse(testing::slurp(report));
        r.check(validate_report(j).empty(), std::string(row) + " report invalid");
        r.check(j.value("method", "") == row, std::string(row) + " labelled " + j.value("method", "?"));

        // Structure read back from the checkpoint.
        const auto shadow = CheckpointBundle::load(fs::path(ck) / "shadow.ckpt");
        r.check(shadow.contains("disc_shad.logits.weight") == flags.use_shadow_disc,
                std::string(row) + " shadow discriminator presence");
        r.check(shadow.contains("generator.down.0.e1.weight") == flags.use_bp_blocks,
                std::string(row) + " back-projection presence");
        r.check(fs::exists(fs::path(ck) / "render.ckpt") == flags.two_stage, std::string(row) + " stage count");
        r.note(std::string(row) + " ok");
    }
    r.note(fmt(seconds_since(t0), 3) + " s");
    return r.done();
}

// ---- 8: freeze contract ----

Outcome freeze_contract()
{
    const auto t0 = Clock::now();
    Report r;
    testing::Scratch dir("accept_freeze");
    RenderConfig rc;
    rc.resolution = 32;
    generate_dataset(2, rc, dir.path(), 5, 0.5);
    const auto data = PairDataset::load(dir.path(), Split::train);
    auto cfg = [](Stage s, int64_t iters) {
        StageConfig c;
        c.stage = s;
        c.batch_size = 2;
        c.epochs = 100;
        c.max_iterations = iters;
        c.net.width_multiplier = 0.25;
        c.net.res_blocks = 2;
        return c;
    };
    const auto scene = train_scene(data, cfg(Stage::scene, 3)).checkpoint;
    const auto shadow = train_shadow(data, cfg(Stage::shadow, 3)).checkpoint;
    const uint64_t hs = parameter_hash(*load_generator(scene)), hp = parameter_hash(*load_generator(shadow));

    auto rcfg = cfg(Stage::render, 50);
    rcfg.debug_checks = true;  // every step asserts zero gradient on both generators
    int64_t steps = 0;
    try {
        TrainHooks h;
        h.on_iteration = [&](const IterationLog &) {
            ++steps;
            return true;
        };
        const auto res = train_render(data, scene, shadow, rcfg, h);
        std::ostringstream a, b;
        a << std::hex << hs;
        b << std::hex << hp;
        r.check(res.checkpoint.state.at("scene_hash") == a.str(), "scene parameters changed");
        r.check(res.checkpoint.state.at("shadow_hash") == b.str(), "shadow parameters changed");
    } catch (const TrainingError &e) {
        r.check(false, e.what());
    }
    r.check(steps == 50, "ran " + std::to_string(steps) + " steps");
    r.note(std::to_string(steps) + " checked steps, frozen hashes unchanged");
    r.note(fmt(seconds_since(t0), 3) + " s");
    return r.done();
}

// ---- 9: CLI pipeline ----

int shell(const std::string &cmd)
{
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_pipeline()
{
    const auto t0 = Clock::now();
    Report r;
    testing::Scratch dir("accept_cli");
    r.check(fs::is_empty(dir.path()), "work directory not empty");
    const std::string drn = DRN_CLI_PATH;
    const std::string cd = "cd " + dir.path().string() + " && ";
    const std::string quiet = " > log.txt 2>&1";
    const std::vector<std::pair<std::string, std::string>> steps = {
        {"gen-data", drn + " gen-data --out data --scenes 2 --size 64"},
        {"fuse", drn + " fuse --data data"},
        {"train scene", drn + " train --stage scene --data data --ckpt-dir ckpt --set train.epochs=1"},
        {"train shadow", drn + " train --stage shadow --data data --ckpt-dir ckpt --set train.epochs=1"},
        {"train render", drn + " train --stage render --data data --ckpt-dir ckpt --set train.epochs=1"},
        {"eval", drn + " eval --data data --ckpt-dir ckpt --report out/report.json --plots out"},
        {"infer", drn + " infer --in data/scene0001/N_2500.png --ckpt-dir ckpt --out out/relit.png"},
    };
    for (const auto &[name, cmd] : steps) {
        const int code = shell(cd + cmd + quiet);
        r.check(code == 0, name + " exited " + std::to_string(code) + ": " + testing::slurp(dir / "log.txt"));
        if (code != 0) return r.done();
    }
    const auto j = nlohmann::json::parse(testing::slurp(dir / "out" / "report.json"));
    const auto errors = validate_report(j);
    r.check(errors.empty(), errors.empty() ? "" : "report: " + errors.front());
    r.check(fs::exists(dir / "out" / "relit.png"), "no relit image");
    const double mins = seconds_since(t0) / 60.0;
    r.check(mins < 10.0, "took " + fmt(mins) + " min");
    r.note("report " + j.value("method", "?") + " PSNR " + (j.at("mean_psnr_db").is_number()
                                                              ? fmt(j.at("mean_psnr_db").get<double>(), 4)
                                                              : "inf") +
           " dB");
    r.note(fmt(mins, 3) + " min");
    return r.done();
}

}  // namespace

int main(int argc, char **argv)
{
    torch::set_num_threads(1);
    at::globalContext().setDeterministicAlgorithms(true, false);
    const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria = {
        {1, {"block oracles", block_oracles}},
        {2, {"gradient suite", gradient_suite}},
        {3, {"fusion oracle", fusion_oracle}},
        {4, {"metric oracles", metric_oracles}},
        {5, {"overfit runs", overfit}},
        {6, {"toy generalization", generalization}},
        {7, {"ablation rows", ablation_rows}},
        {8, {"stage-3 freeze contract", freeze_contract}},
        {9, {"end-to-end CLI pipeline", cli_pipeline}},
    };
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    if (ids.empty()) {
        for (const auto &[id, c] : criteria) ids.push_back(id);
    }
    bool all = true;
    for (int id : ids) {
        const auto it = criteria.find(id);
        if (it == criteria.end()) {
            std::cout << "[FAIL] criterion " << id << ": unknown" << std::endl;
            all = false;
            continue;
        }
        Outcome o;
        try {
            o = it->second.second();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << id << " " << it->second.first << ": "
                  << o.detail << std::endl;
    }
    return all ? 0 : 1;
}
