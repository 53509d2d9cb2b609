#include "drn/networks.hpp"

#include <cmath>

namespace drn {

std::string AblationFlags::label() const
{
    if (!two_stage && !use_bp_blocks && !use_shadow_disc) return "Pix2Pix";
    if (!two_stage && !use_bp_blocks && use_shadow_disc) return "ShadAdv";
    if (!two_stage && use_bp_blocks && use_shadow_disc) return "BPAE";
    if (two_stage && use_bp_blocks && use_shadow_disc) return "DRN";
    return "custom";
}

AblationFlags AblationFlags::from_label(const std::string &label)
{
    if (label == "Pix2Pix") return {false, false, false};
    if (label == "ShadAdv") return {true, false, false};
    if (label == "BPAE") return {true, true, false};
    if (label == "DRN") return {true, true, true};
    throw std::invalid_argument("unknown ablation row '" + label + "'");
}

namespace {

void check_input(const torch::Tensor &x, int64_t channels, int64_t factor, const char *who)
{
    if (x.dim() != 4 || x.size(1) != channels) {
        throw DimensionError(std::string(who) + ": expected [N," + std::to_string(channels) + ",H,W], got " +
                             c10::str(x.sizes()));
    }
    if (x.size(2) % factor != 0 || x.size(3) % factor != 0) {
        throw DimensionError(std::string(who) + ": spatial dims " + c10::str(x.sizes()) +
                             " not divisible by " + std::to_string(factor));
    }
}

}  // namespace

AutoEncoderImpl::AutoEncoderImpl(const GeneratorOptions &options_) : options(options_)
{
    const int64_t w = options.width();
    stem = register_module("stem", nn::Conv2d(nn::Conv2dOptions(3, w, 7).padding(3)));
    down = register_module("down", nn::Sequential());
    up = register_module("up", nn::Sequential());
    res = register_module("res", nn::Sequential());

    int64_t c = w;
    for (int64_t i = 0; i < options.depth(); ++i, c *= 2) {
        auto bp = BackProjectionOptions(c)
                      .lambda1(options.lambda1())
                      .lambda2(options.lambda2())
                      .tie_weights(options.tie_weights());
        if (options.use_bp_blocks()) {
            down->push_back(DBPBlock(bp));
        } else {
            down->push_back(nn::Conv2d(nn::Conv2dOptions(c, 2 * c, 3).stride(2).padding(1)));
        }
        down->push_back(nn::ReLU());
    }
    for (int64_t i = 0; i < options.res_blocks(); ++i) res->push_back(ResidualBlock(c));
    for (int64_t i = 0; i < options.depth(); ++i) {
        c /= 2;
        auto bp = BackProjectionOptions(c)
                      .lambda1(options.lambda1())
                      .lambda2(options.lambda2())
                      .tie_weights(options.tie_weights());
        if (options.use_bp_blocks()) {
            up->push_back(UBPBlock(bp));
        } else {
            up->push_back(nn::ConvTranspose2d(nn::ConvTranspose2dOptions(2 * c, c, 4).stride(2).padding(1)));
        }
        up->push_back(nn::ReLU());
    }
    const int64_t merged = options.skip() ? 2 * w : w;
    select = register_module("select", nn::Conv2d(nn::Conv2dOptions(merged, w, 3).padding(1)));
}

torch::Tensor AutoEncoderImpl::forward(const torch::Tensor &x)
{
    check_input(x, 3, int64_t{1} << options.depth(), "auto-encoder");
    auto shallow = torch::relu(stem->forward(x));
    auto h = up->forward(res->forward(down->forward(shallow)));
    if (options.skip()) h = torch::cat({h, shallow}, 1);
    return torch::relu(select->forward(h));
}

ImageHeadImpl::ImageHeadImpl(int64_t width)
{
    conv = register_module("conv", nn::Conv2d(nn::Conv2dOptions(width, 3, 7).padding(3)));
}

torch::Tensor ImageHeadImpl::forward(const torch::Tensor &features) { return torch::tanh(conv->forward(features)); }

ReRendererImpl::ReRendererImpl(int64_t feature_width_, int64_t reduction) : feature_width(feature_width_)
{
    const int64_t merged = 2 * feature_width;
    perception = register_module("perception", MultiScalePerception(merged));
    recalibration = register_module("recalibration", RecalibrationBlock(merged, reduction));
    paint = register_module("paint", nn::Conv2d(nn::Conv2dOptions(merged, 3, 7).padding(3)));
}

torch::Tensor ReRendererImpl::forward(const torch::Tensor &scene, const torch::Tensor &shadow)
{
    check_input(scene, feature_width, 1, "re-renderer scene input");
    check_input(shadow, feature_width, 1, "re-renderer shadow input");
    if (scene.sizes() != shadow.sizes()) {
        throw DimensionError("re-renderer inputs differ in shape: " + c10::str(scene.sizes()) + " vs " +
                             c10::str(shadow.sizes()));
    }
    auto h = perception->forward(torch::cat({scene, shadow}, 1));
    h = recalibration->forward(h);
    return torch::tanh(paint->forward(h));
}

PatchDiscriminatorImpl::PatchDiscriminatorImpl(int64_t width, int64_t image_channels)
{
    int64_t in = 2 * image_channels;
    int64_t out = width;
    for (int i = 0; i < 4; ++i) {
        // Instance norm cancels a bias, so only the first conv carries one.
        auto conv = nn::Conv2d(nn::Conv2dOptions(in, out, 4).stride(2).padding(1).bias(i == 0));
        convs.push_back(register_module("conv" + std::to_string(i), conv));
        in = out;
        out *= 2;
    }
    logits = register_module("logits", nn::Conv2d(nn::Conv2dOptions(in, 1, 3).padding(1)));
}

torch::Tensor PatchDiscriminatorImpl::forward(const torch::Tensor &condition, const torch::Tensor &candidate)
{
    if (condition.sizes() != candidate.sizes() || condition.dim() != 4) {
        throw DimensionError("discriminator inputs differ in shape: " + c10::str(condition.sizes()) + " vs " +
                             c10::str(candidate.sizes()));
    }
    namespace F = torch::nn::functional;
    auto h = torch::cat({condition, candidate}, 1);
    for (size_t i = 0; i < convs.size(); ++i) {
        h = convs[i]->forward(h);
        if (i > 0) h = F::instance_norm(h);
        h = torch::leaky_relu(h, 0.2);
    }
    return logits->forward(h);
}

int64_t NetworkConfig::generator_width() const
{
    const auto w = static_cast<int64_t>(std::lround(32.0 * width_multiplier));
    if (w < 2 || w % 2 != 0) {
        throw std::invalid_argument("width multiplier " + std::to_string(width_multiplier) +
                                    " gives generator width " + std::to_string(w) + " (must be even, >= 2)");
    }
    return w;
}

int64_t NetworkConfig::discriminator_width() const
{
    return std::max<int64_t>(1, std::lround(64.0 * width_multiplier));
}

GeneratorOptions NetworkConfig::scene_options() const
{
    return GeneratorOptions()
        .width(generator_width())
        .skip(true)
        .use_bp_blocks(flags.use_bp_blocks)
        .res_blocks(res_blocks)
        .lambda1(lambda1)
        .lambda2(lambda2)
        .tie_weights(tie_weights);
}

GeneratorOptions NetworkConfig::shadow_options() const { return scene_options().skip(false); }

void init_weights(nn::Module &module)
{
    torch::NoGradGuard guard;
    for (auto &m : module.modules(/*include_self=*/true)) {
        auto init = [](torch::Tensor &weight, torch::Tensor &bias) {
            torch::nn::init::normal_(weight, 0.0, 0.02);
            if (bias.defined()) torch::nn::init::zeros_(bias);
        };
        if (auto *conv = m->as<nn::Conv2d>()) {
            init(conv->weight, conv->bias);
        } else if (auto *deconv = m->as<nn::ConvTranspose2d>()) {
            init(deconv->weight, deconv->bias);
        }
    }
}

int64_t parameter_count(const nn::Module &module)
{
    int64_t n = 0;
    for (const auto &p : module.parameters()) n += p.numel();
    return n;
}

namespace {

GeneratorOutput run_generator(AutoEncoder &net, ImageHead *head, const ImageTensor &x)
{
    if (x.range() != Range::model) throw RangeError("generators take model-range images");
    auto features = net->forward(x.batched());
    std::optional<ImageTensor> image;
    if (head != nullptr) image.emplace((*head)->forward(features).squeeze(0), Range::model);
    return {FeatureMap(features.squeeze(0)), std::move(image)};
}

}  // namespace

GeneratorOutput scene_forward(AutoEncoder &net, ImageHead *head, const ImageTensor &x)
{
    return run_generator(net, head, x);
}

GeneratorOutput shadow_forward(AutoEncoder &net, ImageHead *head, const ImageTensor &x)
{
    return run_generator(net, head, x);
}

ImageTensor rerender(ReRenderer &rr, const FeatureMap &scene, const FeatureMap &shadow)
{
    auto y = rr->forward(scene.data().unsqueeze(0), shadow.data().unsqueeze(0));
    return {y.squeeze(0), Range::model};
}

torch::Tensor discriminate(PatchDiscriminator &d, const ImageTensor &condition, const ImageTensor &candidate)
{
    return d->forward(condition.batched(), candidate.batched()).squeeze(0);
}

RelightingModel RelightingModel::two_stage(AutoEncoder scene, AutoEncoder shadow, ReRenderer renderer)
{
    RelightingModel m;
    m.scene_ = std::move(scene);
    m.shadow_ = std::move(shadow);
    m.renderer_ = std::move(renderer);
    return m;
}

RelightingModel RelightingModel::one_stage(AutoEncoder generator, ImageHead head)
{
    RelightingModel m;
    m.generator_ = std::move(generator);
    m.head_ = std::move(head);
    return m;
}

torch::Tensor RelightingModel::forward(const torch::Tensor &x)
{
    torch::NoGradGuard guard;
    if (renderer_) {
        return (*renderer_)->forward((*scene_)->forward(x), (*shadow_)->forward(x));
    }
    return (*head_)->forward((*generator_)->forward(x));
}

ImageTensor drn_forward(RelightingModel &model, const ImageTensor &x)
{
    if (x.range() != Range::model) throw RangeError("drn_forward takes a model-range image");
    return {model.forward(x.batched()).squeeze(0), Range::model};
}

}  // namespace drn
