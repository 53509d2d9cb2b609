#include "drn/metrics.hpp"

#include <cmath>
#include <limits>

namespace drn {

namespace F = torch::nn::functional;

namespace {

void check_pair(const torch::Tensor &a, const torch::Tensor &b)
{
    if (a.sizes() != b.sizes()) {
        throw DimensionError("metric inputs differ in shape: " + c10::str(a.sizes()) + " vs " + c10::str(b.sizes()));
    }
    if (a.dim() != 3) throw DimensionError("metric inputs must be [C,H,W]");
}

torch::Tensor gaussian_window(int64_t size, double sigma)
{
    auto x = torch::arange(size, torch::kFloat64) - static_cast<double>(size - 1) / 2.0;
    auto g = torch::exp(-x.pow(2) / (2.0 * sigma * sigma));
    g = g / g.sum();
    return torch::outer(g, g);
}

}  // namespace

double psnr(const torch::Tensor &a, const torch::Tensor &b)
{
    check_pair(a, b);
    const double mse = (a.to(torch::kFloat64) - b.to(torch::kFloat64)).pow(2).mean().item<double>();
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double psnr(const ImageTensor &a, const ImageTensor &b)
{
    if (a.range() != Range::unit || b.range() != Range::unit) throw RangeError("psnr expects unit-range images");
    return psnr(a.data(), b.data());
}

double ssim(const torch::Tensor &a, const torch::Tensor &b, const SsimParams &params)
{
    check_pair(a, b);
    if (a.size(1) < params.window || a.size(2) < params.window) {
        throw DimensionError("ssim needs images of at least " + std::to_string(params.window) + "x" +
                             std::to_string(params.window));
    }
    const int64_t c = a.size(0);
    auto window = gaussian_window(params.window, params.sigma).view({1, 1, params.window, params.window});
    window = window.expand({c, 1, params.window, params.window});
    auto filt = [&](const torch::Tensor &t) { return F::conv2d(t.unsqueeze(0), window, F::Conv2dFuncOptions().groups(c)); };

    auto x = a.to(torch::kFloat64);
    auto y = b.to(torch::kFloat64);
    auto mu_x = filt(x), mu_y = filt(y);
    auto var_x = filt(x * x) - mu_x * mu_x;
    auto var_y = filt(y * y) - mu_y * mu_y;
    auto cov = filt(x * y) - mu_x * mu_y;
    const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
    const double c2 = std::pow(params.k2 * params.dynamic_range, 2);
    auto map = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) /
               ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
    // Per-plane means, then the mean over planes.
    return map.mean({0, 2, 3}).mean().item<double>();
}

double ssim(const ImageTensor &a, const ImageTensor &b, const SsimParams &params)
{
    if (a.range() != Range::unit || b.range() != Range::unit) throw RangeError("ssim expects unit-range images");
    return ssim(a.data(), b.data(), params);
}

void ScoreBlock::add(ImageScore score) { per_image.push_back(std::move(score)); }

void ScoreBlock::finalize()
{
    if (per_image.empty()) {
        mean_psnr_db = 0.0;
        mean_ssim = 0.0;
        return;
    }
    double p = 0.0, s = 0.0;
    for (const auto &score : per_image) {
        p += score.psnr_db;
        s += score.ssim;
    }
    mean_psnr_db = p / static_cast<double>(per_image.size());
    mean_ssim = s / static_cast<double>(per_image.size());
}

nlohmann::json encode_db(double value)
{
    if (std::isinf(value) && value > 0) return "inf";
    return value;
}

double decode_db(const nlohmann::json &value)
{
    if (value.is_string() && value.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    return value.get<double>();
}

namespace {

nlohmann::json block_to_json(const ScoreBlock &block)
{
    auto rows = nlohmann::json::array();
    for (const auto &s : block.per_image) {
        rows.push_back({{"scene_id", s.scene_id}, {"input_light", s.input_light}, {"psnr_db", encode_db(s.psnr_db)},
                        {"ssim", s.ssim}});
    }
    return {{"per_image", rows}, {"mean_psnr_db", encode_db(block.mean_psnr_db)}, {"mean_ssim", block.mean_ssim}};
}

ScoreBlock block_from_json(const nlohmann::json &j)
{
    ScoreBlock block;
    for (const auto &row : j.at("per_image")) {
        block.add({row.at("scene_id").get<std::string>(), row.value("input_light", std::string()),
                   decode_db(row.at("psnr_db")), row.at("ssim").get<double>()});
    }
    block.mean_psnr_db = decode_db(j.at("mean_psnr_db"));
    block.mean_ssim = j.at("mean_ssim").get<double>();
    return block;
}

void validate_block(const nlohmann::json &j, const std::string &where, std::vector<std::string> &errors)
{
    auto check_db = [&](const nlohmann::json &v, const std::string &field) {
        if (v.is_string()) {
            if (v.get<std::string>() != "inf") errors.push_back(field + ": only the string \"inf\" is allowed");
        } else if (!v.is_number()) {
            errors.push_back(field + ": expected a number or \"inf\"");
        } else if (v.get<double>() < 0.0) {
            errors.push_back(field + ": psnr must be >= 0");
        }
    };
    auto check_ssim = [&](const nlohmann::json &v, const std::string &field) {
        if (!v.is_number()) {
            errors.push_back(field + ": expected a number");
        } else if (v.get<double>() < -1.0 || v.get<double>() > 1.0) {
            errors.push_back(field + ": ssim outside [-1, 1]");
        }
    };
    if (!j.is_object()) {
        errors.push_back(where + ": expected an object");
        return;
    }
    for (const char *key : {"per_image", "mean_psnr_db", "mean_ssim"}) {
        if (!j.contains(key)) errors.push_back(where + ": missing '" + key + "'");
    }
    if (j.contains("mean_psnr_db")) check_db(j.at("mean_psnr_db"), where + ".mean_psnr_db");
    if (j.contains("mean_ssim")) check_ssim(j.at("mean_ssim"), where + ".mean_ssim");
    if (j.contains("per_image")) {
        if (!j.at("per_image").is_array()) {
            errors.push_back(where + ".per_image: expected an array");
            return;
        }
        size_t i = 0;
        for (const auto &row : j.at("per_image")) {
            const std::string at = where + ".per_image[" + std::to_string(i++) + "]";
            if (!row.is_object() || !row.contains("scene_id") || !row.at("scene_id").is_string()) {
                errors.push_back(at + ": missing string 'scene_id'");
                continue;
            }
            if (!row.contains("psnr_db")) {
                errors.push_back(at + ": missing 'psnr_db'");
            } else {
                check_db(row.at("psnr_db"), at + ".psnr_db");
            }
            if (!row.contains("ssim")) {
                errors.push_back(at + ": missing 'ssim'");
            } else {
                check_ssim(row.at("ssim"), at + ".ssim");
            }
        }
    }
}

}  // namespace

nlohmann::json MetricReport::to_json() const
{
    auto j = block_to_json(model);
    j["schema_version"] = kSchemaVersion;
    j["method"] = method;
    j["flags"] = flags;
    j["metadata"] = {{"psnr_peak", 1.0},
                     {"ssim", {{"window", 11}, {"sigma", 1.5}, {"k1", 0.01}, {"k2", 0.03}, {"channels", "rgb_mean"}}}};
    j["baseline"] = block_to_json(baseline);
    j["baseline"]["name"] = "input-copy";
    return j;
}

MetricReport MetricReport::from_json(const nlohmann::json &j)
{
    const auto errors = validate_report(j);
    if (!errors.empty()) throw std::invalid_argument("invalid metric report: " + errors.front());
    MetricReport report;
    report.method = j.at("method").get<std::string>();
    report.flags = j.value("flags", nlohmann::json::object());
    report.model = block_from_json(j);
    report.baseline = block_from_json(j.at("baseline"));
    return report;
}

std::vector<std::string> validate_report(const nlohmann::json &j)
{
    std::vector<std::string> errors;
    if (!j.is_object()) return {"report: expected an object"};
    if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer() ||
        j.at("schema_version").get<int>() != MetricReport::kSchemaVersion) {
        errors.push_back("schema_version: expected " + std::to_string(MetricReport::kSchemaVersion));
    }
    if (!j.contains("method") || !j.at("method").is_string()) errors.push_back("method: expected a string label");
    validate_block(j, "report", errors);
    if (!j.contains("baseline")) {
        errors.push_back("report: missing 'baseline'");
    } else {
        validate_block(j.at("baseline"), "baseline", errors);
    }
    return errors;
}

}  // namespace drn
