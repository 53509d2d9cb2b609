#ifndef DRN_TRAINING_HPP
#define DRN_TRAINING_HPP

#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

#include "drn/checkpoint.hpp"
#include "drn/config.hpp"
#include "drn/datagen.hpp"
#include "drn/losses.hpp"
#include "drn/metrics.hpp"
#include "drn/networks.hpp"

namespace drn {

enum class Stage { scene, shadow, render };

std::string to_string(Stage stage);
Stage parse_stage(const std::string &name);

// Raised after three consecutive batches with a non-finite loss.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StageConfig {
    Stage stage = Stage::scene;
    int64_t epochs = 20;
    int64_t batch_size = 4;
    double lr = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    uint64_t seed = 0;
    // Hard cap on optimizer steps, 0 for none.
    int64_t max_iterations = 0;
    // Stage 3: assert after every backward pass that no gradient reached
    // the frozen networks.
    bool debug_checks = false;
    LossWeights loss;
    NetworkConfig net;

    void validate() const;
    nlohmann::json to_json() const;
    static StageConfig from_json(const nlohmann::json &j);
    static StageConfig from_run_config(const RunConfig &run, Stage stage);
};

// Whole split held in memory as bytes. Targets are stored once per scene.
class PairDataset {
public:
    struct Batch {
        torch::Tensor x;  // [N,3,H,W]
        torch::Tensor y;
        torch::Tensor y_sf;
    };

    PairDataset() = default;
    // Evaluation drops identity pairs (input already at the target light):
    // they are solved exactly by copying and would make mean PSNR infinite.
    static PairDataset load(const std::filesystem::path &root, Split split, LightSetting target = default_target(),
                            bool include_identity = true);
    static PairDataset from_pairs(const std::vector<RelightPair> &pairs);

    size_t size() const { return scene_of_.size(); }
    bool empty() const { return scene_of_.empty(); }
    Batch batch(const std::vector<int64_t> &indices, Range range = Range::model) const;

    const std::string &scene_id(size_t i) const { return scene_ids_[scene_of_[i]]; }
    const LightSetting &input_light(size_t i) const { return lights_[i]; }

private:
    void add(const RelightPair &pair);
    void finish();

    std::vector<torch::Tensor> x_parts_, y_parts_, sf_parts_;
    torch::Tensor x_, y_, sf_;  // uint8 [N,3,H,W] and [S,3,H,W]
    std::vector<int64_t> scene_of_;
    std::vector<std::string> scene_ids_;
    std::vector<LightSetting> lights_;
};

struct IterationLog {
    int64_t iter = 0;
    double loss_g = 0.0;
    double loss_d = 0.0;
    double loss_d_shad = std::numeric_limits<double>::quiet_NaN();  // absent unless a shadow adversary runs
    double l1 = 0.0;
};

struct TrainHooks {
    // Called after every optimizer step; return false to stop.
    std::function<bool(const IterationLog &)> on_iteration;
};

struct TrainResult {
    CheckpointBundle checkpoint;
    std::vector<IterationLog> log;
};

// Stage 1 (scene reconversion, target Y_sf) and stage 2 (shadow prior,
// target Y). One discriminator step then one generator step per batch.
// A resume bundle continues from its iteration with identical batches.
TrainResult train_scene(const PairDataset &data, const StageConfig &cfg, const TrainHooks &hooks = {},
                        const CheckpointBundle *resume = nullptr);
TrainResult train_shadow(const PairDataset &data, const StageConfig &cfg, const TrainHooks &hooks = {},
                         const CheckpointBundle *resume = nullptr);

// Stage 3: both generators are loaded without heads and frozen; only the
// re-renderer is optimised.
TrainResult train_render(const PairDataset &data, const CheckpointBundle &scene_ckpt,
                         const CheckpointBundle &shadow_ckpt, const StageConfig &cfg, const TrainHooks &hooks = {},
                         const CheckpointBundle *resume = nullptr);

// Deployment networks rebuilt from stage checkpoints.
AutoEncoder load_generator(const CheckpointBundle &ckpt);
ImageHead load_head(const CheckpointBundle &ckpt);
ReRenderer load_renderer(const CheckpointBundle &ckpt);

std::string checkpoint_file(Stage stage);
// Two-stage: scene.ckpt + shadow.ckpt + render.ckpt. One-stage ablations:
// the generator and head of shadow.ckpt.
RelightingModel load_model(const std::filesystem::path &ckpt_dir, bool two_stage);

void write_loss_log(const std::vector<IterationLog> &log, const std::filesystem::path &path);
std::vector<IterationLog> read_loss_log(const std::filesystem::path &path);

// Scores predictions (clamped to [0,1], not quantized) and the input-copy
// baseline against the target-light images.
MetricReport evaluate(RelightingModel &model, const PairDataset &data, const AblationFlags &flags,
                      int64_t batch_size = 8);
ScoreBlock evaluate_baseline(const PairDataset &data);

}  // namespace drn

#endif
