#include "drn/cli.hpp"

#include <cstdlib>
#include <fstream>

#include <CLI11.hpp>

#include "drn/config.hpp"
#include "drn/datagen.hpp"
#include "drn/plot.hpp"
#include "drn/training.hpp"

namespace drn {

namespace fs = std::filesystem;

void apply_determinism_from_env()
{
    const char *v = std::getenv("DRN_DETERMINISTIC");
    if (v != nullptr && std::string(v) == "1") {
        torch::set_num_threads(1);
        at::globalContext().setDeterministicAlgorithms(true, false);
    }
}

namespace {

struct Common {
    std::string config_file;
    std::vector<std::string> overrides;
};

RunConfig resolve(const Common &common)
{
    RunConfig cfg;
    if (!common.config_file.empty()) cfg.merge_file(common.config_file);
    for (const auto &o : common.overrides) cfg.apply_override(o);
    return cfg;
}

RenderConfig render_config(const RunConfig &cfg)
{
    RenderConfig r;
    r.resolution = cfg.get<int64_t>("data.size");
    r.shadow_length = cfg.get<double>("render.shadow_length");
    r.ambient = cfg.get<double>("render.ambient");
    r.direct = cfg.get<double>("render.direct");
    r.texture = cfg.get<double>("render.texture");
    return r;
}

void require_dir(const fs::path &dir, const std::string &what)
{
    if (!fs::is_directory(dir)) throw std::runtime_error(what + " directory " + dir.string() + " does not exist");
}

// Flags of the trained model, taken from the shadow checkpoint which every
// ablation row has.
AblationFlags trained_flags(const fs::path &ckpt_dir)
{
    const auto path = ckpt_dir / checkpoint_file(Stage::shadow);
    if (!fs::exists(path)) throw std::runtime_error("missing checkpoint shadow.ckpt in " + ckpt_dir.string());
    return StageConfig::from_json(CheckpointBundle::load(path).config).net.flags;
}

int cmd_gen_data(RunConfig cfg, const std::string &out_dir, std::ostream &out)
{
    const auto size = cfg.get<int64_t>("data.size");
    if (size < 16 || size % 16 != 0) {
        throw UsageError("--size " + std::to_string(size) + " is not divisible by 16");
    }
    const auto scenes = cfg.get<int64_t>("data.scenes");
    if (scenes < 1) throw UsageError("--scenes must be at least 1");
    auto render = render_config(cfg);
    try {
        render.validate();
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
    const auto manifest = generate_dataset(static_cast<size_t>(scenes), render, out_dir,
                                           cfg.get<uint64_t>("data.seed"), cfg.get<double>("data.train_ratio"));
    cfg.save(fs::path(out_dir) / "run_config.json");
    out << "generated " << manifest.scenes.size() << " scenes (" << manifest.train.size() << " train, "
        << manifest.val.size() << " val) in " << out_dir << "\n";
    return 0;
}

int cmd_fuse(const RunConfig &cfg, const std::string &data_dir, std::ostream &out)
{
    require_dir(data_dir, "data");
    const auto manifest = Manifest::load(data_dir);
    for (const auto &id : manifest.scenes) fuse_scene(fs::path(data_dir) / id, id);
    cfg.save(fs::path(data_dir) / "run_config.json");
    out << "fused " << manifest.scenes.size() << " scenes\n";
    return 0;
}

int cmd_train(const RunConfig &cfg, const std::string &stage_name, const std::string &data_dir,
              const std::string &ckpt_dir, bool resume, std::ostream &out)
{
    const auto stage = parse_stage(stage_name);
    StageConfig sc;
    try {
        sc = StageConfig::from_run_config(cfg, stage);
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
    if (stage == Stage::render && !sc.net.flags.two_stage) {
        throw UsageError("the one-stage ablation (ablation.two_stage=false) has no render stage");
    }
    const fs::path ckpt(ckpt_dir);
    fs::create_directories(ckpt);
    std::optional<CheckpointBundle> scene_ckpt, shadow_ckpt;
    if (stage == Stage::render) {
        for (auto s : {Stage::scene, Stage::shadow}) {
            if (!fs::exists(ckpt / checkpoint_file(s))) {
                throw std::runtime_error("train --stage render needs " + checkpoint_file(s) + " in " + ckpt_dir +
                                         " (run train --stage " + to_string(s) + " first)");
            }
        }
        scene_ckpt = CheckpointBundle::load(ckpt / checkpoint_file(Stage::scene));
        shadow_ckpt = CheckpointBundle::load(ckpt / checkpoint_file(Stage::shadow));
    }
    require_dir(data_dir, "data");
    const auto data = PairDataset::load(data_dir, Split::train);

    std::optional<CheckpointBundle> previous;
    if (resume && fs::exists(ckpt / checkpoint_file(stage))) previous = CheckpointBundle::load(ckpt / checkpoint_file(stage));
    const CheckpointBundle *from = previous ? &*previous : nullptr;

    const int64_t log_every = cfg.get<int64_t>("train.log_every");
    TrainHooks hooks;
    hooks.on_iteration = [&](const IterationLog &e) {
        if (log_every > 0 && e.iter % log_every == 0) {
            out << stage_name << " iter " << e.iter << " loss_g " << e.loss_g << " l1 " << e.l1 << "\n" << std::flush;
        }
        return true;
    };

    TrainResult result;
    switch (stage) {
    case Stage::scene: result = train_scene(data, sc, hooks, from); break;
    case Stage::shadow: result = train_shadow(data, sc, hooks, from); break;
    case Stage::render: result = train_render(data, *scene_ckpt, *shadow_ckpt, sc, hooks, from); break;
    }
    result.checkpoint.save(ckpt / checkpoint_file(stage));
    auto log = result.log;
    const auto log_path = ckpt / (stage_name + "_loss.csv");
    if (from != nullptr && fs::exists(log_path)) {
        auto earlier = read_loss_log(log_path);
        std::erase_if(earlier, [&](const IterationLog &e) { return e.iter > from->iteration; });
        earlier.insert(earlier.end(), log.begin(), log.end());
        log = std::move(earlier);
    }
    write_loss_log(log, log_path);
    cfg.save(ckpt / "run_config.json");
    out << "trained " << stage_name << " for " << result.checkpoint.iteration << " iterations on " << data.size()
        << " pairs";
    if (!result.log.empty()) out << ", final l1 " << result.log.back().l1;
    out << "\n";
    return 0;
}

int cmd_eval(const RunConfig &cfg, const std::string &data_dir, const std::string &ckpt_dir,
             const std::string &report_path, const std::string &plots_dir, const std::string &split_name,
             std::ostream &out)
{
    require_dir(data_dir, "data");
    Split split = Split::val;
    if (split_name == "train") {
        split = Split::train;
    } else if (split_name == "all") {
        split = Split::all;
    } else if (split_name != "val") {
        throw UsageError("--split must be train, val or all");
    }
    const auto flags = trained_flags(ckpt_dir);
    auto model = load_model(ckpt_dir, flags.two_stage);
    const auto data = PairDataset::load(data_dir, split, default_target(), false);
    if (data.empty()) throw std::runtime_error("the " + split_name + " split of " + data_dir + " is empty");
    const auto report = evaluate(model, data, flags);
    {
        const fs::path rp(report_path);
        if (rp.has_parent_path()) fs::create_directories(rp.parent_path());
        std::ofstream f(rp);
        if (!f) throw std::runtime_error("cannot write " + report_path);
        f << report.to_json().dump(2) << "\n";
        cfg.save(rp.has_parent_path() ? rp.parent_path() / "run_config.json" : fs::path("run_config.json"));
    }
    if (!plots_dir.empty()) {
        fs::create_directories(plots_dir);
        std::vector<std::pair<std::string, std::vector<IterationLog>>> logs;
        for (auto s : {Stage::scene, Stage::shadow, Stage::render}) {
            const auto p = fs::path(ckpt_dir) / (to_string(s) + "_loss.csv");
            if (fs::exists(p)) logs.emplace_back(to_string(s), read_loss_log(p));
        }
        plot_loss_curves(logs, fs::path(plots_dir) / "loss_curves.png");
        plot_metric_bars(report, fs::path(plots_dir) / "metrics.png");
    }
    out << report.method << ": PSNR " << report.model.mean_psnr_db << " dB, SSIM " << report.model.mean_ssim
        << " (input-copy: PSNR " << report.baseline.mean_psnr_db << " dB, SSIM " << report.baseline.mean_ssim
        << ") over " << report.model.per_image.size() << " images\n";
    return 0;
}

int cmd_infer(const RunConfig &cfg, const std::vector<std::string> &inputs, const std::string &ckpt_dir,
              const std::string &out_path, std::ostream &out)
{
    const auto flags = trained_flags(ckpt_dir);
    auto model = load_model(ckpt_dir, flags.two_stage);
    const bool many = inputs.size() > 1 || fs::is_directory(out_path);
    if (many) fs::create_directories(out_path);
    for (const auto &in : inputs) {
        const auto x = load_png(in);
        const auto y = from_model_range(drn_forward(model, to_model_range(x)));
        const fs::path dst = many ? fs::path(out_path) / fs::path(in).filename() : fs::path(out_path);
        if (dst.has_parent_path()) fs::create_directories(dst.parent_path());
        save_png(y, dst);
        out << in << " -> " << dst.string() << "\n";
    }
    const fs::path first = many ? fs::path(out_path) : fs::path(out_path).parent_path();
    cfg.save((first.empty() ? fs::path(".") : first) / "run_config.json");
    return 0;
}

int cmd_report(const RunConfig &cfg, const std::vector<std::string> &reports, std::ostream &out)
{
    bool ok = true;
    out << "method    flags(shad,bp,two)  psnr_db   ssim    baseline_psnr_db\n";
    for (const auto &path : reports) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("cannot read report " + path);
        const auto j = nlohmann::json::parse(f);
        const auto errors = validate_report(j);
        if (!errors.empty()) {
            ok = false;
            for (const auto &e : errors) out << path << ": " << e << "\n";
            continue;
        }
        const auto r = MetricReport::from_json(j);
        char line[160];
        std::snprintf(line, sizeof(line), "%-9s %d,%d,%d               %-9.3f %-7.4f %.3f\n", r.method.c_str(),
                      r.flags.value("use_shadow_disc", false) ? 1 : 0, r.flags.value("use_bp_blocks", false) ? 1 : 0,
                      r.flags.value("two_stage", false) ? 1 : 0, r.model.mean_psnr_db, r.model.mean_ssim,
                      r.baseline.mean_psnr_db);
        out << line;
    }
    cfg.save("run_config.json");
    if (!ok) throw std::runtime_error("one or more reports failed schema validation");
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Deep relighting network: data generation, training, evaluation and inference", "drn"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&common](CLI::App *sub) {
        sub->add_option("--config", common.config_file, "JSON file of dotted-key settings")->check(CLI::ExistingFile);
        sub->add_option("--set", common.overrides, "override a setting, key=value (repeatable)");
    };

    std::string out_dir, data_dir, ckpt_dir, report_path, plots_dir, stage, split = "val", out_path;
    std::optional<int64_t> scenes, size, seed;
    std::optional<double> train_ratio;
    std::vector<std::string> inputs, reports;
    bool resume = false;

    auto *gen = app.add_subcommand("gen-data", "render a synthetic multi-illumination dataset");
    gen->add_option("--out", out_dir, "dataset root")->required();
    gen->add_option("--scenes", scenes, "number of scenes");
    gen->add_option("--size", size, "image side in pixels, a multiple of 16");
    gen->add_option("--seed", seed, "scene seed");
    gen->add_option("--train-ratio", train_ratio, "fraction of scenes in the training split");
    add_common(gen);

    auto *fuse = app.add_subcommand("fuse", "recompute shadow_free.png for every scene");
    fuse->add_option("--data", data_dir, "dataset root")->required();
    add_common(fuse);

    auto *train = app.add_subcommand("train", "train one stage");
    train->add_option("--stage", stage, "scene, shadow or render")->required();
    train->add_option("--data", data_dir, "dataset root")->required();
    train->add_option("--ckpt-dir", ckpt_dir, "checkpoint directory")->required();
    train->add_option("--seed", seed, "training seed");
    train->add_flag("--resume", resume, "continue from an existing checkpoint of this stage");
    add_common(train);

    auto *eval = app.add_subcommand("eval", "score a trained model and the input-copy baseline");
    eval->add_option("--data", data_dir, "dataset root")->required();
    eval->add_option("--ckpt-dir", ckpt_dir, "checkpoint directory")->required();
    eval->add_option("--report", report_path, "output report JSON")->required();
    eval->add_option("--plots", plots_dir, "directory for loss-curve and metric-bar images");
    eval->add_option("--split", split, "train, val or all");
    add_common(eval);

    auto *infer = app.add_subcommand("infer", "relight PNG images to the target light");
    infer->add_option("--in", inputs, "input PNG(s)")->required()->check(CLI::ExistingFile);
    infer->add_option("--ckpt-dir", ckpt_dir, "checkpoint directory")->required();
    infer->add_option("--out", out_path, "output PNG, or a directory for several inputs")->required();
    add_common(infer);

    auto *report = app.add_subcommand("report", "validate reports and print them as a table");
    report->add_option("reports", reports, "report JSON files")->required();
    add_common(report);

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp &e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp &e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        auto cfg = resolve(common);
        if (scenes) cfg.set("data.scenes", *scenes);
        if (size) cfg.set("data.size", *size);
        if (train_ratio) cfg.set("data.train_ratio", *train_ratio);
        if (seed) cfg.set(gen->parsed() ? "data.seed" : "train.seed", *seed);

        if (gen->parsed()) return cmd_gen_data(cfg, out_dir, out);
        if (fuse->parsed()) return cmd_fuse(cfg, data_dir, out);
        if (train->parsed()) return cmd_train(cfg, stage, data_dir, ckpt_dir, resume, out);
        if (eval->parsed()) return cmd_eval(cfg, data_dir, ckpt_dir, report_path, plots_dir, split, out);
        if (infer->parsed()) return cmd_infer(cfg, inputs, ckpt_dir, out_path, out);
        if (report->parsed()) return cmd_report(cfg, reports, out);
    } catch (const UsageError &e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace drn
