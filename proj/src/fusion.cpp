#include "drn/fusion.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace drn {

namespace F = torch::nn::functional;

void SceneBundle::validate() const
{
    if (images.empty()) {
        throw std::invalid_argument("scene bundle '" + scene_id + "' is empty");
    }
    std::set<LightSetting> seen;
    for (const auto &[light, img] : images) {
        if (!seen.insert(light).second) {
            throw std::invalid_argument("scene bundle '" + scene_id + "' repeats light " + light.stem());
        }
        if (img.range() != Range::unit) {
            throw RangeError("scene bundle images must be unit-range");
        }
        if (img.height() != images.front().second.height() || img.width() != images.front().second.width()) {
            throw DimensionError("scene bundle '" + scene_id + "' mixes image sizes");
        }
    }
}

WeightMap::WeightMap(torch::Tensor data) : data_(std::move(data))
{
    if (data_.dim() != 2) throw DimensionError("weight map must be [H,W]");
    if (!torch::isfinite(data_).all().item<bool>() || (data_ < 0).any().item<bool>()) {
        throw RangeError("weight map entries must be finite and non-negative");
    }
}

namespace {

// Mirror without repeating the edge sample (cv::BORDER_REFLECT_101).
int64_t reflect101(int64_t i, int64_t n)
{
    if (n == 1) return 0;
    const int64_t period = 2 * (n - 1);
    int64_t j = std::abs(i) % period;
    return j >= n ? period - j : j;
}

torch::Tensor pad_reflect(const torch::Tensor &x, int64_t dim, int64_t pad)
{
    const int64_t n = x.size(dim);
    std::vector<int64_t> idx;
    idx.reserve(n + 2 * pad);
    for (int64_t i = -pad; i < n + pad; ++i) idx.push_back(reflect101(i, n));
    return x.index_select(dim, torch::tensor(idx, torch::kLong));
}

// Separable filter of a [C,H,W] tensor with reflect-101 borders.
torch::Tensor filter_separable(const torch::Tensor &x, const torch::Tensor &taps)
{
    const int64_t c = x.size(0);
    const int64_t pad = taps.size(0) / 2;
    auto k = taps.to(x.dtype());
    auto rows = pad_reflect(x, 1, pad).unsqueeze(0);
    rows = F::conv2d(rows, k.view({1, 1, -1, 1}).expand({c, 1, k.size(0), 1}), F::Conv2dFuncOptions().groups(c));
    auto cols = pad_reflect(rows.squeeze(0), 2, pad).unsqueeze(0);
    cols = F::conv2d(cols, k.view({1, 1, 1, -1}).expand({c, 1, 1, k.size(0)}), F::Conv2dFuncOptions().groups(c));
    return cols.squeeze(0);
}

torch::Tensor binomial_taps()
{
    return torch::tensor({1.0, 4.0, 6.0, 4.0, 1.0}, torch::kFloat64) / 16.0;
}

// Lift [H,W] to [1,H,W]; remember to drop it again.
std::pair<torch::Tensor, bool> as_chw(const torch::Tensor &img)
{
    if (img.dim() == 2) return {img.unsqueeze(0), true};
    if (img.dim() == 3) return {img, false};
    throw DimensionError("pyramid input must be [H,W] or [C,H,W]");
}

}  // namespace

WeightMap quality_weight(const ImageTensor &img, const MertensParams &params)
{
    auto x = img.data().to(torch::kFloat64);
    auto gray = x.mean(0, true);
    auto lap_taps = torch::tensor({{0.0, 1.0, 0.0}, {1.0, -4.0, 1.0}, {0.0, 1.0, 0.0}}, torch::kFloat64);
    auto padded = pad_reflect(pad_reflect(gray, 1, 1), 2, 1).unsqueeze(0);
    auto contrast = torch::conv2d(padded, lap_taps.view({1, 1, 3, 3})).squeeze(0).squeeze(0).abs();

    auto mean = x.mean(0);
    auto saturation = ((x - mean.unsqueeze(0)).pow(2).mean(0)).sqrt();

    const double denom = 2.0 * params.sigma * params.sigma;
    auto exposedness = torch::exp(-(x - 0.5).pow(2) / denom).prod(0);

    auto w = contrast.pow(params.contrast_exponent) * saturation.pow(params.saturation_exponent) *
             exposedness.pow(params.exposure_exponent) + params.epsilon;
    return WeightMap(w);
}

torch::Tensor pyramid_down(const torch::Tensor &img)
{
    auto [x, squeezed] = as_chw(img);
    using torch::indexing::Slice;
    auto out = filter_separable(x, binomial_taps()).index({Slice(), Slice(0, torch::indexing::None, 2),
                                                           Slice(0, torch::indexing::None, 2)});
    return squeezed ? out.squeeze(0) : out;
}

torch::Tensor pyramid_up(const torch::Tensor &img, int64_t height, int64_t width)
{
    auto [x, squeezed] = as_chw(img);
    if ((height + 1) / 2 != x.size(1) || (width + 1) / 2 != x.size(2)) {
        throw DimensionError("pyramid_up target size does not match the coarse level");
    }
    using torch::indexing::Slice;
    auto up = torch::zeros({x.size(0), height, width}, x.options());
    up.index_put_({Slice(), Slice(0, torch::indexing::None, 2), Slice(0, torch::indexing::None, 2)}, x);
    auto out = filter_separable(up, binomial_taps() * 2.0);
    return squeezed ? out.squeeze(0) : out;
}

std::vector<torch::Tensor> gaussian_pyramid(const torch::Tensor &img, int levels)
{
    if (levels < 1) throw std::invalid_argument("pyramid needs at least one level");
    const int64_t min_side = std::min(img.size(-1), img.size(-2));
    if (levels > static_cast<int>(std::floor(std::log2(static_cast<double>(min_side))))) {
        throw std::invalid_argument("pyramid depth " + std::to_string(levels) + " exceeds log2 of " +
                                    std::to_string(min_side));
    }
    std::vector<torch::Tensor> pyr{img};
    for (int i = 1; i < levels; ++i) pyr.push_back(pyramid_down(pyr.back()));
    return pyr;
}

std::vector<torch::Tensor> laplacian_pyramid(const torch::Tensor &img, int levels)
{
    auto pyr = gaussian_pyramid(img, levels);
    for (size_t i = 0; i + 1 < pyr.size(); ++i) {
        pyr[i] = pyr[i] - pyramid_up(pyr[i + 1], pyr[i].size(-2), pyr[i].size(-1));
    }
    return pyr;
}

torch::Tensor collapse_pyramid(const std::vector<torch::Tensor> &pyramid)
{
    if (pyramid.empty()) throw std::invalid_argument("cannot collapse an empty pyramid");
    auto out = pyramid.back();
    for (size_t i = pyramid.size() - 1; i-- > 0;) {
        out = pyramid[i] + pyramid_up(out, pyramid[i].size(-2), pyramid[i].size(-1));
    }
    return out;
}

int default_pyramid_levels(int64_t height, int64_t width)
{
    const int depth = static_cast<int>(std::floor(std::log2(static_cast<double>(std::min(height, width))))) - 2;
    return std::max(1, depth);
}

ImageTensor exposure_fuse(const SceneBundle &bundle, std::optional<int> levels, const MertensParams &params)
{
    bundle.validate();
    const auto &first = bundle.images.front().second;
    const int depth = levels.value_or(default_pyramid_levels(first.height(), first.width()));

    std::vector<torch::Tensor> weights;
    weights.reserve(bundle.images.size());
    auto total = torch::zeros({first.height(), first.width()}, torch::kFloat64);
    for (const auto &[light, img] : bundle.images) {
        weights.push_back(quality_weight(img, params).data());
        total = total + weights.back();
    }

    std::vector<torch::Tensor> blended;
    for (size_t k = 0; k < bundle.images.size(); ++k) {
        auto w_pyr = gaussian_pyramid(weights[k] / total, depth);
        auto l_pyr = laplacian_pyramid(bundle.images[k].second.data().to(torch::kFloat64), depth);
        if (blended.empty()) blended.resize(l_pyr.size());
        for (size_t l = 0; l < l_pyr.size(); ++l) {
            auto term = l_pyr[l] * w_pyr[l].unsqueeze(0);
            blended[l] = blended[l].defined() ? blended[l] + term : term;
        }
    }
    return {collapse_pyramid(blended).clamp(0.0, 1.0), Range::unit};
}

}  // namespace drn
