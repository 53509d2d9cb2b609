#ifndef DRN_FUSION_HPP
#define DRN_FUSION_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "drn/imaging.hpp"

namespace drn {

// All renders of one scene; the input to exposure fusion.
struct SceneBundle {
    std::string scene_id;
    std::vector<std::pair<LightSetting, ImageTensor>> images;

    // Throws std::invalid_argument on an empty bundle, duplicate settings or
    // mismatched dimensions. A single image is accepted and fuses to itself.
    void validate() const;
};

// Per-pixel quality [H,W] (float64), non-negative and finite.
class WeightMap {
public:
    explicit WeightMap(torch::Tensor data);
    const torch::Tensor &data() const { return data_; }

private:
    torch::Tensor data_;
};

struct MertensParams {
    double contrast_exponent = 1.0;
    double saturation_exponent = 1.0;
    double exposure_exponent = 1.0;
    double sigma = 0.2;
    double epsilon = 1e-12;
};

// contrast^wc * saturation^ws * exposedness^we + epsilon, where contrast is
// |Laplacian| of the (R+G+B)/3 gray image, saturation the population stddev
// over RGB and exposedness the product of per-channel Gaussians around 0.5.
WeightMap quality_weight(const ImageTensor &img, const MertensParams &params = {});

// Pyramids operate on [C,H,W] or [H,W] float64 tensors. Level 0 is the input.
std::vector<torch::Tensor> gaussian_pyramid(const torch::Tensor &img, int levels);
std::vector<torch::Tensor> laplacian_pyramid(const torch::Tensor &img, int levels);
torch::Tensor collapse_pyramid(const std::vector<torch::Tensor> &pyramid);

// 5-tap binomial blur then drop odd rows/columns.
torch::Tensor pyramid_down(const torch::Tensor &img);
// Zero-insert to (height, width), then blur with the gain-4 binomial kernel.
torch::Tensor pyramid_up(const torch::Tensor &img, int64_t height, int64_t width);

// floor(log2(min(H,W))) - 2, at least 1: keeps the coarsest level >= 4 px.
int default_pyramid_levels(int64_t height, int64_t width);

ImageTensor exposure_fuse(const SceneBundle &bundle, std::optional<int> levels = std::nullopt,
                          const MertensParams &params = {});

}  // namespace drn

#endif
