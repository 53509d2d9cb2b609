#ifndef DRN_BLOCKS_HPP
#define DRN_BLOCKS_HPP

#include <vector>

#include <torch/torch.h>

#include "drn/imaging.hpp"

namespace drn {

namespace nn = torch::nn;

struct BackProjectionOptions {
    BackProjectionOptions(int64_t channels) : channels_(channels) {}
    // Width C of the high-resolution side; the low-resolution side has 2C.
    TORCH_ARG(int64_t, channels);
    TORCH_ARG(double, lambda1) = 1.0;
    TORCH_ARG(double, lambda2) = 1.0;
    // Reuse the first encoder (DBP) or decoder (UBP) for the residual path.
    TORCH_ARG(bool, tie_weights) = false;
};

// Down-sampling back-projection:
//   z = lambda2 * E1(x) + E2(D2(E1(x)) - lambda1 * x)
// E1, E2: 3x3 stride-2 conv C->2C; D2: 4x4 stride-2 deconv 2C->C.
class DBPBlockImpl : public nn::Module {
public:
    explicit DBPBlockImpl(const BackProjectionOptions &options);
    torch::Tensor forward(const torch::Tensor &x);

    nn::Conv2d e1{nullptr}, e2{nullptr};
    nn::ConvTranspose2d d2{nullptr};
    BackProjectionOptions options;
};
TORCH_MODULE(DBPBlock);

// Up-sampling back-projection:
//   x = lambda2 * D1(z) + D2(E2(D1(z)) - lambda1 * z)
// D1, D2: 4x4 stride-2 deconv 2C->C; E2: 3x3 stride-2 conv C->2C.
class UBPBlockImpl : public nn::Module {
public:
    explicit UBPBlockImpl(const BackProjectionOptions &options);
    torch::Tensor forward(const torch::Tensor &z);

    nn::ConvTranspose2d d1{nullptr}, d2{nullptr};
    nn::Conv2d e2{nullptr};
    BackProjectionOptions options;
};
TORCH_MODULE(UBPBlock);

// x + IN(conv(ReLU(IN(conv(x))))), zero-padded 3x3 convs without bias.
class ResidualBlockImpl : public nn::Module {
public:
    explicit ResidualBlockImpl(int64_t channels);
    torch::Tensor forward(const torch::Tensor &x);

    nn::Conv2d conv1{nullptr}, conv2{nullptr};
    int64_t channels;
};
TORCH_MODULE(ResidualBlock);

// Parallel same-padded convs of kernel 1,3,5,7 each producing channels/4,
// concatenated, then ReLU.
class MultiScalePerceptionImpl : public nn::Module {
public:
    explicit MultiScalePerceptionImpl(int64_t channels);
    torch::Tensor forward(const torch::Tensor &x);

    std::vector<nn::Conv2d> branches;
    int64_t channels;
};
TORCH_MODULE(MultiScalePerception);

// Squeeze-excitation gate: y_c = sigmoid(fc2(relu(fc1(mean_hw(x)))))_c * x_c.
class RecalibrationBlockImpl : public nn::Module {
public:
    RecalibrationBlockImpl(int64_t channels, int64_t reduction = 4);
    torch::Tensor forward(const torch::Tensor &x);
    torch::Tensor gates(const torch::Tensor &x);

    nn::Linear fc1{nullptr}, fc2{nullptr};
    int64_t channels;
};
TORCH_MODULE(RecalibrationBlock);

// Threshold used by the shadow-region discriminator: 15/255.
inline constexpr double kShadowAlpha = 15.0 / 255.0;

// z = min(alpha, x) on unit-range intensities.
torch::Tensor shadow_rectify(const torch::Tensor &unit, double alpha = kShadowAlpha);
ImageTensor shadow_rectify(const ImageTensor &img, double alpha = kShadowAlpha);

// Single-image wrappers over the batched modules.
FeatureMap dbp_forward(DBPBlock &block, const FeatureMap &x);
FeatureMap ubp_forward(UBPBlock &block, const FeatureMap &z);
FeatureMap resblock_forward(ResidualBlock &block, const FeatureMap &x);
FeatureMap multiscale_forward(MultiScalePerception &block, const FeatureMap &x);
FeatureMap recalibrate(RecalibrationBlock &block, const FeatureMap &x);

}  // namespace drn

#endif
