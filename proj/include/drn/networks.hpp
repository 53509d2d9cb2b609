#ifndef DRN_NETWORKS_HPP
#define DRN_NETWORKS_HPP

#include <optional>
#include <string>

#include <torch/torch.h>

#include "drn/blocks.hpp"
#include "drn/imaging.hpp"

namespace drn {

// The three switches that span the ablation table: shadow-region adversary,
// back-projection sampling blocks, and the two-stage decomposition.
struct AblationFlags {
    bool use_shadow_disc = true;
    bool use_bp_blocks = true;
    bool two_stage = true;

    // "Pix2Pix", "ShadAdv", "BPAE", "DRN", or "custom" for combinations
    // outside the table.
    std::string label() const;
    static AblationFlags from_label(const std::string &label);
};

struct GeneratorOptions {
    TORCH_ARG(int64_t, width) = 32;
    TORCH_ARG(bool, skip) = true;
    TORCH_ARG(bool, use_bp_blocks) = true;
    TORCH_ARG(int64_t, res_blocks) = 9;
    TORCH_ARG(int64_t, depth) = 4;
    TORCH_ARG(double, lambda1) = 1.0;
    TORCH_ARG(double, lambda2) = 1.0;
    TORCH_ARG(bool, tie_weights) = false;
};

// Encoder/decoder trunk shared by scene reconversion (skip on) and shadow
// prior estimation (skip off):
//   stem 7x7 -> depth x DBP -> res_blocks x ResBlock -> depth x UBP
//   -> [concat stem features] -> 3x3 selection conv -> width channels.
// With use_bp_blocks off the DBP/UBP blocks become plain stride-2 conv /
// deconv layers (the auto-encoder of the ablation rows).
class AutoEncoderImpl : public nn::Module {
public:
    explicit AutoEncoderImpl(const GeneratorOptions &options);
    torch::Tensor forward(const torch::Tensor &x);

    GeneratorOptions options;
    nn::Conv2d stem{nullptr};
    nn::Sequential down{nullptr};
    nn::Sequential res{nullptr};
    nn::Sequential up{nullptr};
    nn::Conv2d select{nullptr};
};
TORCH_MODULE(AutoEncoder);

// Training-only 7x7 conv + tanh mapping features back to an image; dropped
// after stages 1-2.
class ImageHeadImpl : public nn::Module {
public:
    explicit ImageHeadImpl(int64_t width);
    torch::Tensor forward(const torch::Tensor &features);

    nn::Conv2d conv{nullptr};
};
TORCH_MODULE(ImageHead);

// concat(scene, shadow) -> multi-scale perception -> recalibration
// -> 7x7 painting conv -> tanh.
class ReRendererImpl : public nn::Module {
public:
    explicit ReRendererImpl(int64_t feature_width, int64_t reduction = 4);
    torch::Tensor forward(const torch::Tensor &scene, const torch::Tensor &shadow);

    int64_t feature_width;
    MultiScalePerception perception{nullptr};
    RecalibrationBlock recalibration{nullptr};
    nn::Conv2d paint{nullptr};
};
TORCH_MODULE(ReRenderer);

// Conditional patch discriminator over concat(condition, candidate): four
// 4x4 stride-2 convs (instance norm after all but the first, leaky ReLU 0.2)
// and a 3x3 conv to one logit per 16x16 patch.
class PatchDiscriminatorImpl : public nn::Module {
public:
    explicit PatchDiscriminatorImpl(int64_t width = 64, int64_t image_channels = 3);
    torch::Tensor forward(const torch::Tensor &condition, const torch::Tensor &candidate);

    std::vector<nn::Conv2d> convs;
    nn::Conv2d logits{nullptr};
};
TORCH_MODULE(PatchDiscriminator);

struct NetworkConfig {
    double width_multiplier = 1.0;
    int64_t res_blocks = 9;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    bool tie_weights = false;
    AblationFlags flags;

    int64_t generator_width() const;
    int64_t discriminator_width() const;
    GeneratorOptions scene_options() const;
    GeneratorOptions shadow_options() const;
};

// normal(0, 0.02) conv/deconv weights, zero biases.
void init_weights(nn::Module &module);
int64_t parameter_count(const nn::Module &module);

struct GeneratorOutput {
    FeatureMap features;
    std::optional<ImageTensor> image;
};

// Single-image entry points; x is model-range.
GeneratorOutput scene_forward(AutoEncoder &net, ImageHead *head, const ImageTensor &x);
GeneratorOutput shadow_forward(AutoEncoder &net, ImageHead *head, const ImageTensor &x);
ImageTensor rerender(ReRenderer &rr, const FeatureMap &scene, const FeatureMap &shadow);
torch::Tensor discriminate(PatchDiscriminator &d, const ImageTensor &condition, const ImageTensor &candidate);

// Deployment model: the two-stage DRN, or a single generator with its head
// for the one-stage ablation rows.
class RelightingModel {
public:
    static RelightingModel two_stage(AutoEncoder scene, AutoEncoder shadow, ReRenderer renderer);
    static RelightingModel one_stage(AutoEncoder generator, ImageHead head);

    bool is_two_stage() const { return renderer_.has_value(); }
    // Batched [N,3,H,W] model-range in and out; no autograd.
    torch::Tensor forward(const torch::Tensor &x);

private:
    RelightingModel() = default;
    std::optional<AutoEncoder> scene_;
    std::optional<AutoEncoder> shadow_;
    std::optional<ReRenderer> renderer_;
    std::optional<AutoEncoder> generator_;
    std::optional<ImageHead> head_;
};

ImageTensor drn_forward(RelightingModel &model, const ImageTensor &x);

}  // namespace drn

#endif
