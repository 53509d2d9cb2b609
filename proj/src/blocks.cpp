#include "drn/blocks.hpp"

#include <string>

namespace drn {

namespace {

void expect_channels(const torch::Tensor &x, int64_t channels, const char *who)
{
    if (x.dim() != 4) {
        throw DimensionError(std::string(who) + ": expected [N,C,H,W], got " + c10::str(x.sizes()));
    }
    if (x.size(1) != channels) {
        throw DimensionError(std::string(who) + ": expected " + std::to_string(channels) + " channels, got " +
                             std::to_string(x.size(1)));
    }
}

nn::Conv2d down_conv(int64_t in, int64_t out)
{
    return nn::Conv2d(nn::Conv2dOptions(in, out, 3).stride(2).padding(1));
}

nn::ConvTranspose2d up_conv(int64_t in, int64_t out)
{
    return nn::ConvTranspose2d(nn::ConvTranspose2dOptions(in, out, 4).stride(2).padding(1));
}

FeatureMap unbatch(const torch::Tensor &y) { return FeatureMap(y.squeeze(0)); }

}  // namespace

DBPBlockImpl::DBPBlockImpl(const BackProjectionOptions &options_) : options(options_)
{
    const int64_t c = options.channels();
    e1 = register_module("e1", down_conv(c, 2 * c));
    d2 = register_module("d2", up_conv(2 * c, c));
    e2 = options.tie_weights() ? e1 : register_module("e2", down_conv(c, 2 * c));
}

torch::Tensor DBPBlockImpl::forward(const torch::Tensor &x)
{
    expect_channels(x, options.channels(), "DBP block");
    if (x.size(2) % 2 != 0 || x.size(3) % 2 != 0) {
        throw DimensionError("DBP block needs even spatial dims, got " + c10::str(x.sizes()));
    }
    auto latent = e1->forward(x);
    auto residual = d2->forward(latent) - options.lambda1() * x;
    return options.lambda2() * latent + e2->forward(residual);
}

UBPBlockImpl::UBPBlockImpl(const BackProjectionOptions &options_) : options(options_)
{
    const int64_t c = options.channels();
    d1 = register_module("d1", up_conv(2 * c, c));
    e2 = register_module("e2", down_conv(c, 2 * c));
    d2 = options.tie_weights() ? d1 : register_module("d2", up_conv(2 * c, c));
}

torch::Tensor UBPBlockImpl::forward(const torch::Tensor &z)
{
    expect_channels(z, 2 * options.channels(), "UBP block");
    auto upsampled = d1->forward(z);
    auto residual = e2->forward(upsampled) - options.lambda1() * z;
    return options.lambda2() * upsampled + d2->forward(residual);
}

ResidualBlockImpl::ResidualBlockImpl(int64_t channels_) : channels(channels_)
{
    auto opts = nn::Conv2dOptions(channels, channels, 3).padding(1).bias(false);
    conv1 = register_module("conv1", nn::Conv2d(opts));
    conv2 = register_module("conv2", nn::Conv2d(opts));
}

torch::Tensor ResidualBlockImpl::forward(const torch::Tensor &x)
{
    expect_channels(x, channels, "residual block");
    namespace F = torch::nn::functional;
    auto h = torch::relu(F::instance_norm(conv1->forward(x)));
    h = F::instance_norm(conv2->forward(h));
    return x + h;
}

MultiScalePerceptionImpl::MultiScalePerceptionImpl(int64_t channels_) : channels(channels_)
{
    if (channels % 4 != 0) {
        throw DimensionError("multi-scale perception width must be divisible by 4, got " + std::to_string(channels));
    }
    for (int64_t k : {1, 3, 5, 7}) {
        auto conv = nn::Conv2d(nn::Conv2dOptions(channels, channels / 4, k).padding(k / 2));
        branches.push_back(register_module("k" + std::to_string(k), conv));
    }
}

torch::Tensor MultiScalePerceptionImpl::forward(const torch::Tensor &x)
{
    expect_channels(x, channels, "multi-scale perception");
    std::vector<torch::Tensor> outs;
    outs.reserve(branches.size());
    for (auto &branch : branches) outs.push_back(branch->forward(x));
    return torch::relu(torch::cat(outs, 1));
}

RecalibrationBlockImpl::RecalibrationBlockImpl(int64_t channels_, int64_t reduction) : channels(channels_)
{
    if (reduction < 1 || channels % reduction != 0) {
        throw DimensionError("recalibration: " + std::to_string(channels) + " channels not divisible by ratio " +
                             std::to_string(reduction));
    }
    fc1 = register_module("fc1", nn::Linear(channels, channels / reduction));
    fc2 = register_module("fc2", nn::Linear(channels / reduction, channels));
}

torch::Tensor RecalibrationBlockImpl::gates(const torch::Tensor &x)
{
    expect_channels(x, channels, "recalibration");
    auto squeezed = x.mean({2, 3});
    return torch::sigmoid(fc2->forward(torch::relu(fc1->forward(squeezed))));
}

torch::Tensor RecalibrationBlockImpl::forward(const torch::Tensor &x)
{
    return x * gates(x).unsqueeze(-1).unsqueeze(-1);
}

torch::Tensor shadow_rectify(const torch::Tensor &unit, double alpha)
{
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("shadow threshold must lie in (0,1], got " + std::to_string(alpha));
    }
    return torch::clamp_max(unit, alpha);
}

ImageTensor shadow_rectify(const ImageTensor &img, double alpha)
{
    if (img.range() != Range::unit) throw RangeError("shadow_rectify operates on unit-range images");
    return {shadow_rectify(img.data(), alpha), Range::unit};
}

FeatureMap dbp_forward(DBPBlock &block, const FeatureMap &x) { return unbatch(block->forward(x.data().unsqueeze(0))); }
FeatureMap ubp_forward(UBPBlock &block, const FeatureMap &z) { return unbatch(block->forward(z.data().unsqueeze(0))); }
FeatureMap resblock_forward(ResidualBlock &block, const FeatureMap &x)
{
    return unbatch(block->forward(x.data().unsqueeze(0)));
}
FeatureMap multiscale_forward(MultiScalePerception &block, const FeatureMap &x)
{
    return unbatch(block->forward(x.data().unsqueeze(0)));
}
FeatureMap recalibrate(RecalibrationBlock &block, const FeatureMap &x)
{
    return unbatch(block->forward(x.data().unsqueeze(0)));
}

}  // namespace drn
