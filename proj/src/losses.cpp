#include "drn/losses.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>

namespace drn {

void LossWeights::validate() const
{
    if (!(l1_adv >= 0.0) || !(perceptual >= 0.0)) {
        throw std::invalid_argument("loss weights must be non-negative");
    }
    if (!(shadow_alpha > 0.0 && shadow_alpha <= 1.0)) {
        throw std::invalid_argument("shadow threshold must lie in (0,1]");
    }
}

namespace {

torch::Tensor bce_with_logits(const torch::Tensor &logits, double target)
{
    return torch::binary_cross_entropy_with_logits(logits, torch::full_like(logits, target));
}

}  // namespace

torch::Tensor adv_loss_d(const torch::Tensor &real_logits, const torch::Tensor &fake_logits)
{
    if (real_logits.sizes() != fake_logits.sizes()) {
        throw DimensionError("real and fake logit maps differ in shape: " + c10::str(real_logits.sizes()) +
                             " vs " + c10::str(fake_logits.sizes()));
    }
    return 0.5 * (bce_with_logits(real_logits, 1.0) + bce_with_logits(fake_logits, 0.0));
}

torch::Tensor adv_loss_g(const torch::Tensor &fake_logits) { return bce_with_logits(fake_logits, 1.0); }

torch::Tensor rectify_model_range(const torch::Tensor &model, double alpha)
{
    return shadow_rectify((model + 1.0) * 0.5, alpha) * 2.0 - 1.0;
}

ObjectiveTerms scene_objective(const torch::Tensor &generated, const torch::Tensor &target,
                               PatchDiscriminator &disc, const torch::Tensor &input, const LossWeights &w)
{
    return shadow_objective(generated, target, disc, nullptr, input, w);
}

ObjectiveTerms shadow_objective(const torch::Tensor &generated, const torch::Tensor &target,
                                PatchDiscriminator &disc, PatchDiscriminator *shadow_disc,
                                const torch::Tensor &input, const LossWeights &w)
{
    if (generated.sizes() != target.sizes()) {
        throw DimensionError("generated and target images differ in shape");
    }
    ObjectiveTerms terms;
    terms.l1 = torch::l1_loss(generated, target);
    terms.adversarial = adv_loss_g(disc->forward(input, generated));
    terms.total = w.l1_adv * terms.l1 + terms.adversarial;
    if (shadow_disc != nullptr) {
        auto rect_input = rectify_model_range(input, w.shadow_alpha);
        auto rect_generated = rectify_model_range(generated, w.shadow_alpha);
        terms.shadow_adversarial = adv_loss_g((*shadow_disc)->forward(rect_input, rect_generated));
        terms.total = terms.total + terms.shadow_adversarial;
    }
    return terms;
}

torch::Tensor perceptual_l1_loss(const torch::Tensor &estimate, const torch::Tensor &target, const FeatureFn &feat,
                                 double lambda)
{
    if (estimate.sizes() != target.sizes()) {
        throw DimensionError("estimate and target differ in shape");
    }
    auto loss = torch::l1_loss(estimate, target);
    if (lambda == 0.0) return loss;
    auto f_est = feat(estimate);
    auto f_tgt = feat(target);
    if (f_est.sizes() != f_tgt.sizes()) {
        throw DimensionError("feature extractor output shapes differ: " + c10::str(f_est.sizes()) + " vs " +
                             c10::str(f_tgt.sizes()));
    }
    return loss + lambda * torch::l1_loss(f_est, f_tgt);
}

FixedFeatureExtractorImpl::FixedFeatureExtractorImpl(uint64_t seed)
{
    auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
    int64_t in = 3;
    for (int64_t out : {16, 32, 64}) {
        auto conv = nn::Conv2d(nn::Conv2dOptions(in, out, 3).stride(2).padding(1));
        {
            torch::NoGradGuard guard;
            conv->weight.normal_(0.0, std::sqrt(2.0 / static_cast<double>(in * 9)), gen);
            conv->bias.zero_();
        }
        conv->weight.set_requires_grad(false);
        conv->bias.set_requires_grad(false);
        convs.push_back(register_module("conv" + std::to_string(convs.size()), conv));
        in = out;
    }
}

torch::Tensor FixedFeatureExtractorImpl::forward(const torch::Tensor &x)
{
    auto h = x;
    for (auto &conv : convs) h = torch::relu(conv->forward(h));
    return h;
}

}  // namespace drn
