#ifndef DRN_METRICS_HPP
#define DRN_METRICS_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "drn/imaging.hpp"

namespace drn {

// 10 log10(1 / MSE) over all channels and pixels, peak 1.0. Identical images
// give +infinity.
double psnr(const torch::Tensor &a, const torch::Tensor &b);
double psnr(const ImageTensor &a, const ImageTensor &b);

struct SsimParams {
    int64_t window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

// Mean local SSIM with a Gaussian window over valid positions, computed per
// RGB plane and averaged over the planes.
double ssim(const torch::Tensor &a, const torch::Tensor &b, const SsimParams &params = {});
double ssim(const ImageTensor &a, const ImageTensor &b, const SsimParams &params = {});

struct ImageScore {
    std::string scene_id;
    std::string input_light;
    double psnr_db = 0.0;
    double ssim = 0.0;
};

struct ScoreBlock {
    std::vector<ImageScore> per_image;
    double mean_psnr_db = 0.0;
    double mean_ssim = 0.0;

    void add(ImageScore score);
    // Recomputes the means from per_image.
    void finalize();
};

struct MetricReport {
    static constexpr int kSchemaVersion = 1;

    std::string method;  // ablation row label, e.g. "DRN"
    nlohmann::json flags = nlohmann::json::object();
    ScoreBlock model;
    ScoreBlock baseline;  // input copied straight to the output

    nlohmann::json to_json() const;
    static MetricReport from_json(const nlohmann::json &j);
};

// Empty when j is a well-formed report; otherwise one message per problem.
std::vector<std::string> validate_report(const nlohmann::json &j);

// Numbers as JSON, +infinity as the string "inf".
nlohmann::json encode_db(double value);
double decode_db(const nlohmann::json &value);

}  // namespace drn

#endif
