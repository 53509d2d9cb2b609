#ifndef DRN_LOSSES_HPP
#define DRN_LOSSES_HPP

#include <functional>

#include <torch/torch.h>

#include "drn/blocks.hpp"
#include "drn/networks.hpp"

namespace drn {

struct LossWeights {
    // Balance between L1 and the adversarial terms of the generator objectives.
    double l1_adv = 100.0;
    // Balance of the feature term in the re-render loss.
    double perceptual = 0.01;
    double shadow_alpha = kShadowAlpha;

    void validate() const;
};

// Conditional discriminator loss: mean binary cross-entropy over every patch
// logit of both maps, real targets 1 and fake targets 0.
torch::Tensor adv_loss_d(const torch::Tensor &real_logits, const torch::Tensor &fake_logits);

// Non-saturating generator loss: BCE of the fake logits against target 1.
torch::Tensor adv_loss_g(const torch::Tensor &fake_logits);

struct ObjectiveTerms {
    torch::Tensor total;
    torch::Tensor l1;
    torch::Tensor adversarial;
    torch::Tensor shadow_adversarial;  // undefined unless a shadow adversary is used
};

// Model-range [-1,1] images to the rectified input of the shadow-region
// discriminator, expressed back in model range.
torch::Tensor rectify_model_range(const torch::Tensor &model, double alpha);

// l1_adv * mean|G(x) - y_sf| + adv_loss_g(D(x, G(x))).
ObjectiveTerms scene_objective(const torch::Tensor &generated, const torch::Tensor &target,
                               PatchDiscriminator &disc, const torch::Tensor &input, const LossWeights &w);

// scene_objective plus adv_loss_g(D_shad(rect(x), rect(G(x)))) with weight 1.
// Passing a null shadow discriminator drops the third term.
ObjectiveTerms shadow_objective(const torch::Tensor &generated, const torch::Tensor &target,
                                PatchDiscriminator &disc, PatchDiscriminator *shadow_disc,
                                const torch::Tensor &input, const LossWeights &w);

using FeatureFn = std::function<torch::Tensor(const torch::Tensor &)>;

// mean|y - y_hat| + lambda * mean|feat(y) - feat(y_hat)|.
torch::Tensor perceptual_l1_loss(const torch::Tensor &estimate, const torch::Tensor &target,
                                 const FeatureFn &feat, double lambda);

// Frozen random-feature stand-in for a pretrained classifier: three 3x3
// stride-2 convs 3->16->32->64 with ReLU, He-normal weights from a fixed seed.
class FixedFeatureExtractorImpl : public nn::Module {
public:
    explicit FixedFeatureExtractorImpl(uint64_t seed = 1234);
    torch::Tensor forward(const torch::Tensor &x);

    std::vector<nn::Conv2d> convs;
};
TORCH_MODULE(FixedFeatureExtractor);

}  // namespace drn

#endif
