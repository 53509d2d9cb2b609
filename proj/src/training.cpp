#include "drn/training.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace drn {

std::string to_string(Stage stage)
{
    switch (stage) {
    case Stage::scene: return "scene";
    case Stage::shadow: return "shadow";
    case Stage::render: return "render";
    }
    return "?";
}

Stage parse_stage(const std::string &name)
{
    if (name == "scene") return Stage::scene;
    if (name == "shadow") return Stage::shadow;
    if (name == "render") return Stage::render;
    throw UsageError("unknown stage '" + name + "' (expected scene, shadow or render)");
}

// ---- StageConfig ----

void StageConfig::validate() const
{
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("batch size must be positive");
    if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw std::invalid_argument("adam betas must lie in [0,1)");
    }
    if (max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
    loss.validate();
    net.generator_width();
    if (net.res_blocks < 0) throw std::invalid_argument("res_blocks must be >= 0");
}

nlohmann::json StageConfig::to_json() const
{
    return {
        {"stage", to_string(stage)},
        {"train.epochs", epochs},
        {"train.batch_size", batch_size},
        {"train.lr", lr},
        {"train.beta1", beta1},
        {"train.beta2", beta2},
        {"train.seed", seed},
        {"train.max_iterations", max_iterations},
        {"train.debug_checks", debug_checks},
        {"loss.l1_adv", loss.l1_adv},
        {"loss.perceptual", loss.perceptual},
        {"loss.shadow_alpha", loss.shadow_alpha},
        {"net.width_multiplier", net.width_multiplier},
        {"net.res_blocks", net.res_blocks},
        {"net.lambda1", net.lambda1},
        {"net.lambda2", net.lambda2},
        {"net.tie_weights", net.tie_weights},
        {"ablation.use_shadow_disc", net.flags.use_shadow_disc},
        {"ablation.use_bp_blocks", net.flags.use_bp_blocks},
        {"ablation.two_stage", net.flags.two_stage},
    };
}

StageConfig StageConfig::from_json(const nlohmann::json &j)
{
    StageConfig c;
    c.stage = parse_stage(j.at("stage").get<std::string>());
    c.epochs = j.at("train.epochs").get<int64_t>();
    c.batch_size = j.at("train.batch_size").get<int64_t>();
    c.lr = j.at("train.lr").get<double>();
    c.beta1 = j.at("train.beta1").get<double>();
    c.beta2 = j.at("train.beta2").get<double>();
    c.seed = j.at("train.seed").get<uint64_t>();
    c.max_iterations = j.at("train.max_iterations").get<int64_t>();
    c.debug_checks = j.at("train.debug_checks").get<bool>();
    c.loss.l1_adv = j.at("loss.l1_adv").get<double>();
    c.loss.perceptual = j.at("loss.perceptual").get<double>();
    c.loss.shadow_alpha = j.at("loss.shadow_alpha").get<double>();
    c.net.width_multiplier = j.at("net.width_multiplier").get<double>();
    c.net.res_blocks = j.at("net.res_blocks").get<int64_t>();
    c.net.lambda1 = j.at("net.lambda1").get<double>();
    c.net.lambda2 = j.at("net.lambda2").get<double>();
    c.net.tie_weights = j.at("net.tie_weights").get<bool>();
    c.net.flags.use_shadow_disc = j.at("ablation.use_shadow_disc").get<bool>();
    c.net.flags.use_bp_blocks = j.at("ablation.use_bp_blocks").get<bool>();
    c.net.flags.two_stage = j.at("ablation.two_stage").get<bool>();
    return c;
}

StageConfig StageConfig::from_run_config(const RunConfig &run, Stage stage)
{
    auto j = run.values();
    j["stage"] = to_string(stage);
    auto c = from_json(j);
    c.validate();
    return c;
}

// ---- PairDataset ----

void PairDataset::add(const RelightPair &pair)
{
    if (scene_ids_.empty() || scene_ids_.back() != pair.scene_id) {
        scene_ids_.push_back(pair.scene_id);
        y_parts_.push_back(to_bytes(pair.target.data()));
        sf_parts_.push_back(to_bytes(pair.shadow_free.data()));
    }
    x_parts_.push_back(to_bytes(pair.input.data()));
    scene_of_.push_back(static_cast<int64_t>(scene_ids_.size()) - 1);
    lights_.push_back(pair.input_light);
}

void PairDataset::finish()
{
    if (x_parts_.empty()) return;
    x_ = torch::stack(x_parts_);
    y_ = torch::stack(y_parts_);
    sf_ = torch::stack(sf_parts_);
    x_parts_.clear();
    y_parts_.clear();
    sf_parts_.clear();
}

PairDataset PairDataset::load(const std::filesystem::path &root, Split split, LightSetting target,
                              bool include_identity)
{
    PairDataset data;
    auto stream = load_pairs(root, target, split);
    while (auto pair = stream.next()) {
        if (include_identity || pair->input_light != target) data.add(*pair);
    }
    data.finish();
    return data;
}

PairDataset PairDataset::from_pairs(const std::vector<RelightPair> &pairs)
{
    PairDataset data;
    for (const auto &p : pairs) data.add(p);
    data.finish();
    return data;
}

PairDataset::Batch PairDataset::batch(const std::vector<int64_t> &indices, Range range) const
{
    if (indices.empty()) throw std::invalid_argument("empty batch");
    auto idx = torch::tensor(indices, torch::kInt64);
    std::vector<int64_t> scenes;
    scenes.reserve(indices.size());
    for (auto i : indices) scenes.push_back(scene_of_.at(static_cast<size_t>(i)));
    auto sidx = torch::tensor(scenes, torch::kInt64);
    auto convert = [range](const torch::Tensor &bytes) {
        auto unit = bytes.to(torch::kFloat32) / 255.0f;
        return range == Range::unit ? unit : unit * 2.0f - 1.0f;
    };
    return {convert(x_.index_select(0, idx)), convert(y_.index_select(0, sidx)),
            convert(sf_.index_select(0, sidx))};
}

// ---- training loops ----

namespace {

std::vector<int64_t> epoch_permutation(int64_t n, uint64_t seed, int64_t epoch)
{
    std::vector<int64_t> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + static_cast<uint64_t>(epoch) + 1);
    for (int64_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<int64_t>(rng() % static_cast<uint64_t>(i + 1));
        std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
    }
    return perm;
}

// Walks the epoch/batch schedule from a given iteration so a resumed run
// sees exactly the batches the uninterrupted run would have seen.
class Schedule {
public:
    Schedule(int64_t n, const StageConfig &cfg) : n_(n), batch_(cfg.batch_size), seed_(cfg.seed)
    {
        per_epoch_ = (n + batch_ - 1) / batch_;
        total_ = cfg.epochs * per_epoch_;
        if (cfg.max_iterations > 0) total_ = std::min(total_, cfg.max_iterations);
    }

    int64_t total() const { return total_; }

    std::vector<int64_t> indices(int64_t iter)
    {
        const int64_t epoch = iter / per_epoch_;
        if (epoch != cached_epoch_) {
            perm_ = epoch_permutation(n_, seed_, epoch);
            cached_epoch_ = epoch;
        }
        const int64_t begin = (iter % per_epoch_) * batch_;
        const int64_t end = std::min(n_, begin + batch_);
        return {perm_.begin() + begin, perm_.begin() + end};
    }

private:
    int64_t n_, batch_;
    uint64_t seed_;
    int64_t per_epoch_ = 1, total_ = 0;
    int64_t cached_epoch_ = -1;
    std::vector<int64_t> perm_;
};

torch::optim::Adam make_adam(const std::vector<torch::Tensor> &params, const StageConfig &cfg)
{
    return torch::optim::Adam(params,
                              torch::optim::AdamOptions(cfg.lr).betas({cfg.beta1, cfg.beta2}));
}

std::vector<torch::Tensor> concat_params(std::initializer_list<const nn::Module *> modules)
{
    std::vector<torch::Tensor> out;
    for (const auto *m : modules) {
        for (auto &p : m->parameters()) out.push_back(p);
    }
    return out;
}

std::string hex(uint64_t v)
{
    std::ostringstream out;
    out << std::hex << v;
    return out.str();
}

void check_resume(const CheckpointBundle *resume, Stage stage)
{
    if (resume != nullptr && resume->stage != to_string(stage)) {
        throw std::invalid_argument("cannot resume " + to_string(stage) + " training from a " + resume->stage +
                                    " checkpoint");
    }
}

// Tracks consecutive non-finite batches; throws on the third.
class FiniteGuard {
public:
    explicit FiniteGuard(int64_t streak) : streak_(streak) {}

    void record(bool finite, int64_t iter, const std::string &detail)
    {
        if (finite) {
            streak_ = 0;
            return;
        }
        if (++streak_ >= 3) {
            throw TrainingError("non-finite loss on 3 consecutive batches (last at iteration " + std::to_string(iter) +
                                ": " + detail + ")");
        }
    }

    int64_t streak() const { return streak_; }

private:
    int64_t streak_;
};

bool finite(const torch::Tensor &t) { return t.defined() && std::isfinite(t.item<double>()); }

TrainResult train_adversarial(const PairDataset &data, const StageConfig &cfg, Stage stage, const TrainHooks &hooks,
                              const CheckpointBundle *resume)
{
    if (data.empty()) throw std::invalid_argument("training set is empty");
    cfg.validate();
    check_resume(resume, stage);

    torch::manual_seed(cfg.seed * 1000003ULL + static_cast<uint64_t>(stage));
    const bool scene = stage == Stage::scene;
    AutoEncoder gen(scene ? cfg.net.scene_options() : cfg.net.shadow_options());
    ImageHead head(cfg.net.generator_width());
    PatchDiscriminator disc(cfg.net.discriminator_width());
    std::optional<PatchDiscriminator> disc_shad;
    if (!scene && cfg.net.flags.use_shadow_disc) disc_shad.emplace(cfg.net.discriminator_width());
    init_weights(*gen);
    init_weights(*head);
    init_weights(*disc);
    if (disc_shad) init_weights(**disc_shad);

    auto opt_g = make_adam(concat_params({gen.get(), head.get()}), cfg);
    auto opt_d = make_adam(disc->parameters(), cfg);
    std::optional<torch::optim::Adam> opt_ds;
    if (disc_shad) opt_ds.emplace(make_adam((*disc_shad)->parameters(), cfg));

    int64_t iter = 0;
    FiniteGuard guard(0);
    if (resume != nullptr) {
        restore_module(*resume, "generator", *gen);
        restore_module(*resume, "head", *head);
        restore_module(*resume, "disc", *disc);
        restore_adam(*resume, "adam_g", opt_g);
        restore_adam(*resume, "adam_d", opt_d);
        if (disc_shad) {
            restore_module(*resume, "disc_shad", **disc_shad);
            restore_adam(*resume, "adam_ds", *opt_ds);
        }
        iter = resume->iteration;
        guard = FiniteGuard(resume->state.value("nonfinite_streak", int64_t{0}));
    }

    const double alpha = cfg.loss.shadow_alpha;
    Schedule schedule(static_cast<int64_t>(data.size()), cfg);
    std::vector<IterationLog> log;
    while (iter < schedule.total()) {
        auto b = data.batch(schedule.indices(iter));
        const auto &target = scene ? b.y_sf : b.y;
        IterationLog entry;
        entry.iter = iter + 1;

        auto fake = head->forward(gen->forward(b.x));
        auto fake_d = fake.detach();

        auto loss_d = adv_loss_d(disc->forward(b.x, target), disc->forward(b.x, fake_d));
        const bool d_ok = finite(loss_d);
        if (d_ok) {
            opt_d.zero_grad();
            loss_d.backward();
            opt_d.step();
        }
        entry.loss_d = loss_d.item<double>();

        bool ds_ok = true;
        if (disc_shad) {
            auto rect_x = rectify_model_range(b.x, alpha);
            auto loss_ds = adv_loss_d((*disc_shad)->forward(rect_x, rectify_model_range(target, alpha)),
                                      (*disc_shad)->forward(rect_x, rectify_model_range(fake_d, alpha)));
            ds_ok = finite(loss_ds);
            if (ds_ok) {
                opt_ds->zero_grad();
                loss_ds.backward();
                opt_ds->step();
            }
            entry.loss_d_shad = loss_ds.item<double>();
        }

        auto terms = shadow_objective(fake, target, disc, disc_shad ? &*disc_shad : nullptr, b.x, cfg.loss);
        const bool g_ok = finite(terms.total);
        if (g_ok) {
            opt_g.zero_grad();
            terms.total.backward();
            opt_g.step();
        }
        entry.loss_g = terms.total.item<double>();
        entry.l1 = terms.l1.item<double>();

        ++iter;
        std::ostringstream detail;
        detail << "loss_g=" << entry.loss_g << " loss_d=" << entry.loss_d << " loss_d_shad=" << entry.loss_d_shad;
        guard.record(d_ok && ds_ok && g_ok, iter, detail.str());
        log.push_back(entry);
        if (hooks.on_iteration && !hooks.on_iteration(entry)) break;
    }

    TrainResult result;
    auto &ck = result.checkpoint;
    ck.stage = to_string(stage);
    ck.iteration = iter;
    ck.config = cfg.to_json();
    ck.state = {{"nonfinite_streak", guard.streak()}, {"generator_hash", hex(parameter_hash(*gen))}};
    store_module(ck, "generator", *gen);
    store_module(ck, "head", *head);
    store_module(ck, "disc", *disc);
    store_adam(ck, "adam_g", opt_g);
    store_adam(ck, "adam_d", opt_d);
    if (disc_shad) {
        store_module(ck, "disc_shad", **disc_shad);
        store_adam(ck, "adam_ds", *opt_ds);
    }
    result.log = std::move(log);
    return result;
}

void freeze(nn::Module &m)
{
    for (auto &p : m.parameters()) p.set_requires_grad(false);
    m.eval();
}

void assert_no_grad(const nn::Module &m, const std::string &name, int64_t iter)
{
    for (const auto &p : m.named_parameters()) {
        const auto &g = p.value().grad();
        if (p.value().requires_grad() || (g.defined() && g.abs().max().item<double>() != 0.0)) {
            throw TrainingError("gradient reached frozen " + name + " parameter '" + p.key() + "' at iteration " +
                                std::to_string(iter));
        }
    }
}

}  // namespace

TrainResult train_scene(const PairDataset &data, const StageConfig &cfg, const TrainHooks &hooks,
                        const CheckpointBundle *resume)
{
    auto c = cfg;
    c.stage = Stage::scene;
    return train_adversarial(data, c, Stage::scene, hooks, resume);
}

TrainResult train_shadow(const PairDataset &data, const StageConfig &cfg, const TrainHooks &hooks,
                         const CheckpointBundle *resume)
{
    auto c = cfg;
    c.stage = Stage::shadow;
    return train_adversarial(data, c, Stage::shadow, hooks, resume);
}

AutoEncoder load_generator(const CheckpointBundle &ckpt)
{
    const auto cfg = StageConfig::from_json(ckpt.config);
    if (cfg.stage == Stage::render) throw std::invalid_argument("a render checkpoint holds no generator");
    AutoEncoder gen(cfg.stage == Stage::scene ? cfg.net.scene_options() : cfg.net.shadow_options());
    restore_module(ckpt, "generator", *gen);
    return gen;
}

ImageHead load_head(const CheckpointBundle &ckpt)
{
    const auto cfg = StageConfig::from_json(ckpt.config);
    ImageHead head(cfg.net.generator_width());
    restore_module(ckpt, "head", *head);
    return head;
}

ReRenderer load_renderer(const CheckpointBundle &ckpt)
{
    const auto cfg = StageConfig::from_json(ckpt.config);
    ReRenderer rr(cfg.net.generator_width());
    restore_module(ckpt, "renderer", *rr);
    return rr;
}

TrainResult train_render(const PairDataset &data, const CheckpointBundle &scene_ckpt,
                         const CheckpointBundle &shadow_ckpt, const StageConfig &cfg_in, const TrainHooks &hooks,
                         const CheckpointBundle *resume)
{
    auto cfg = cfg_in;
    cfg.stage = Stage::render;
    if (data.empty()) throw std::invalid_argument("training set is empty");
    cfg.validate();
    check_resume(resume, Stage::render);
    if (scene_ckpt.stage != "scene") throw std::invalid_argument("expected a scene checkpoint, got " + scene_ckpt.stage);
    if (shadow_ckpt.stage != "shadow") {
        throw std::invalid_argument("expected a shadow checkpoint, got " + shadow_ckpt.stage);
    }

    auto scene = load_generator(scene_ckpt);
    auto shadow = load_generator(shadow_ckpt);
    const int64_t width = scene->options.width();
    if (shadow->options.width() != width) {
        throw std::invalid_argument("scene and shadow networks have different feature widths");
    }
    cfg.net.width_multiplier = StageConfig::from_json(scene_ckpt.config).net.width_multiplier;
    freeze(*scene);
    freeze(*shadow);
    const uint64_t scene_hash = parameter_hash(*scene);
    const uint64_t shadow_hash = parameter_hash(*shadow);

    torch::manual_seed(cfg.seed * 1000003ULL + static_cast<uint64_t>(Stage::render));
    ReRenderer renderer(width);
    init_weights(*renderer);
    FixedFeatureExtractor extractor;
    auto opt = make_adam(renderer->parameters(), cfg);

    int64_t iter = 0;
    FiniteGuard guard(0);
    if (resume != nullptr) {
        restore_module(*resume, "renderer", *renderer);
        restore_adam(*resume, "adam_r", opt);
        iter = resume->iteration;
        guard = FiniteGuard(resume->state.value("nonfinite_streak", int64_t{0}));
    }

    FeatureFn feat = [&extractor](const torch::Tensor &t) { return extractor->forward(t); };
    Schedule schedule(static_cast<int64_t>(data.size()), cfg);
    std::vector<IterationLog> log;
    while (iter < schedule.total()) {
        auto b = data.batch(schedule.indices(iter));
        IterationLog entry;
        entry.iter = iter + 1;
        entry.loss_d = std::numeric_limits<double>::quiet_NaN();

        auto pred = renderer->forward(scene->forward(b.x), shadow->forward(b.x));
        auto loss = perceptual_l1_loss(pred, b.y, feat, cfg.loss.perceptual);
        const bool ok = finite(loss);
        if (ok) {
            opt.zero_grad();
            loss.backward();
            if (cfg.debug_checks) {
                assert_no_grad(*scene, "scene", iter + 1);
                assert_no_grad(*shadow, "shadow", iter + 1);
            }
            opt.step();
        }
        entry.loss_g = loss.item<double>();
        entry.l1 = torch::l1_loss(pred.detach(), b.y).item<double>();

        ++iter;
        guard.record(ok, iter, "loss=" + std::to_string(entry.loss_g));
        log.push_back(entry);
        if (hooks.on_iteration && !hooks.on_iteration(entry)) break;
    }

    if (parameter_hash(*scene) != scene_hash || parameter_hash(*shadow) != shadow_hash) {
        throw TrainingError("frozen scene/shadow parameters changed during re-renderer training");
    }

    TrainResult result;
    auto &ck = result.checkpoint;
    ck.stage = "render";
    ck.iteration = iter;
    ck.config = cfg.to_json();
    ck.state = {{"nonfinite_streak", guard.streak()},
                {"scene_hash", hex(scene_hash)},
                {"shadow_hash", hex(shadow_hash)},
                {"scene_config_hash", scene_ckpt.config_hash()},
                {"shadow_config_hash", shadow_ckpt.config_hash()}};
    store_module(ck, "renderer", *renderer);
    store_adam(ck, "adam_r", opt);
    result.log = std::move(log);
    return result;
}

std::string checkpoint_file(Stage stage) { return to_string(stage) + ".ckpt"; }

namespace {

CheckpointBundle load_required(const std::filesystem::path &dir, Stage stage)
{
    const auto path = dir / checkpoint_file(stage);
    if (!std::filesystem::exists(path)) {
        throw std::runtime_error("missing checkpoint " + checkpoint_file(stage) + " in " + dir.string());
    }
    return CheckpointBundle::load(path);
}

}  // namespace

RelightingModel load_model(const std::filesystem::path &ckpt_dir, bool two_stage)
{
    if (!two_stage) {
        const auto shadow = load_required(ckpt_dir, Stage::shadow);
        auto gen = load_generator(shadow);
        auto head = load_head(shadow);
        gen->eval();
        head->eval();
        return RelightingModel::one_stage(gen, head);
    }
    const auto scene = load_required(ckpt_dir, Stage::scene);
    const auto shadow = load_required(ckpt_dir, Stage::shadow);
    const auto render = load_required(ckpt_dir, Stage::render);
    auto s = load_generator(scene);
    auto p = load_generator(shadow);
    auto r = load_renderer(render);
    s->eval();
    p->eval();
    r->eval();
    return RelightingModel::two_stage(s, p, r);
}

// ---- loss log ----

void write_loss_log(const std::vector<IterationLog> &log, const std::filesystem::path &path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    auto field = [&out](double v) {
        if (std::isfinite(v)) out << v;
    };
    out << std::setprecision(9);
    out << "iter,loss_g,loss_d,loss_d_shad,l1\n";
    for (const auto &e : log) {
        out << e.iter << ',';
        field(e.loss_g);
        out << ',';
        field(e.loss_d);
        out << ',';
        field(e.loss_d_shad);
        out << ',';
        field(e.l1);
        out << '\n';
    }
}

std::vector<IterationLog> read_loss_log(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "iter,loss_g,loss_d,loss_d_shad,l1") throw std::runtime_error(path.string() + " is not a loss log");
    std::vector<IterationLog> log;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        while (cols.size() < 5) cols.emplace_back();
        auto num = [](const std::string &s) {
            return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
        };
        log.push_back({std::stoll(cols[0]), num(cols[1]), num(cols[2]), num(cols[3]), num(cols[4])});
    }
    return log;
}

// ---- evaluation ----

ScoreBlock evaluate_baseline(const PairDataset &data)
{
    if (data.empty()) throw std::invalid_argument("validation set is empty");
    ScoreBlock block;
    for (size_t i = 0; i < data.size(); ++i) {
        auto b = data.batch({static_cast<int64_t>(i)}, Range::unit);
        block.add({data.scene_id(i), data.input_light(i).stem(), psnr(b.x[0], b.y[0]), ssim(b.x[0], b.y[0])});
    }
    block.finalize();
    return block;
}

MetricReport evaluate(RelightingModel &model, const PairDataset &data, const AblationFlags &flags,
                      int64_t batch_size)
{
    if (data.empty()) throw std::invalid_argument("validation set is empty");
    MetricReport report;
    report.method = flags.label();
    report.flags = {{"use_shadow_disc", flags.use_shadow_disc},
                    {"use_bp_blocks", flags.use_bp_blocks},
                    {"two_stage", flags.two_stage}};
    const auto n = static_cast<int64_t>(data.size());
    for (int64_t begin = 0; begin < n; begin += batch_size) {
        std::vector<int64_t> idx;
        for (int64_t i = begin; i < std::min(n, begin + batch_size); ++i) idx.push_back(i);
        auto b = data.batch(idx, Range::unit);
        auto pred = ((model.forward(b.x * 2.0f - 1.0f) + 1.0f) * 0.5f).clamp(0.0, 1.0);
        for (size_t k = 0; k < idx.size(); ++k) {
            const auto i = static_cast<size_t>(idx[k]);
            const auto ki = static_cast<int64_t>(k);
            report.model.add(
                {data.scene_id(i), data.input_light(i).stem(), psnr(pred[ki], b.y[ki]), ssim(pred[ki], b.y[ki])});
        }
    }
    report.model.finalize();
    report.baseline = evaluate_baseline(data);
    return report;
}

}  // namespace drn
