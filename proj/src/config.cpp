#include "drn/config.hpp"

#include <fstream>

#include "drn/blocks.hpp"

namespace drn {

const nlohmann::json &RunConfig::defaults()
{
    static const nlohmann::json d = {
        {"data.scenes", 2},
        {"data.size", 64},
        {"data.seed", 0},
        {"data.train_ratio", 0.9},
        {"render.shadow_length", 0.3},
        {"render.ambient", 0.25},
        {"render.direct", 0.75},
        {"render.texture", 0.15},
        {"train.epochs", 20},
        {"train.batch_size", 4},
        {"train.lr", 1e-4},
        {"train.beta1", 0.5},
        {"train.beta2", 0.999},
        {"train.seed", 0},
        {"train.max_iterations", 0},
        {"train.debug_checks", false},
        {"train.log_every", 0},
        {"loss.l1_adv", 100.0},
        {"loss.perceptual", 0.01},
        {"loss.shadow_alpha", kShadowAlpha},
        {"net.width_multiplier", 1.0},
        {"net.res_blocks", 9},
        {"net.lambda1", 1.0},
        {"net.lambda2", 1.0},
        {"net.tie_weights", false},
        {"ablation.use_shadow_disc", true},
        {"ablation.use_bp_blocks", true},
        {"ablation.two_stage", true},
    };
    return d;
}

RunConfig::RunConfig() : values_(defaults()) {}

void RunConfig::merge(const nlohmann::json &flat)
{
    if (!flat.is_object()) throw UsageError("config must be a JSON object with dotted keys");
    for (const auto &[key, value] : flat.items()) set(key, value);
}

void RunConfig::merge_file(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path.string());
    try {
        merge(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error &e) {
        throw UsageError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
}

void RunConfig::set(const std::string &key, const nlohmann::json &value)
{
    const auto &d = defaults();
    if (!d.contains(key)) throw UsageError("unknown config key '" + key + "'");
    const auto &ref = d.at(key);
    const bool ok = (ref.is_boolean() && value.is_boolean()) ||
                    (ref.is_number_integer() && value.is_number_integer()) ||
                    (ref.is_number_float() && value.is_number()) || (ref.is_string() && value.is_string());
    if (!ok) throw UsageError("config key '" + key + "' expects " + std::string(ref.type_name()));
    if (ref.is_number_float()) {
        values_[key] = value.get<double>();
    } else if (ref.is_number_integer() && value.is_number_integer() && value.get<int64_t>() < 0 &&
               key != "train.seed") {
        throw UsageError("config key '" + key + "' must be non-negative");
    } else {
        values_[key] = value;
    }
}

void RunConfig::set_from_string(const std::string &key, const std::string &text)
{
    const auto &d = defaults();
    if (!d.contains(key)) throw UsageError("unknown config key '" + key + "'");
    const auto &ref = d.at(key);
    try {
        if (ref.is_boolean()) {
            if (text == "true" || text == "1") {
                set(key, true);
            } else if (text == "false" || text == "0") {
                set(key, false);
            } else {
                throw UsageError("config key '" + key + "' expects true/false, got '" + text + "'");
            }
        } else if (ref.is_number_integer()) {
            size_t used = 0;
            const long long v = std::stoll(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            set(key, static_cast<int64_t>(v));
        } else if (ref.is_number_float()) {
            size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            set(key, v);
        } else {
            set(key, text);
        }
    } catch (const UsageError &) {
        throw;
    } catch (const std::exception &) {
        throw UsageError("config key '" + key + "' cannot parse '" + text + "'");
    }
}

void RunConfig::apply_override(const std::string &assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw UsageError("override '" + assignment + "' is not key=value");
    set_from_string(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void RunConfig::save(const std::filesystem::path &path) const
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << values_.dump(2) << "\n";
}

}  // namespace drn
