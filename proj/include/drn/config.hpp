#ifndef DRN_CONFIG_HPP
#define DRN_CONFIG_HPP

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace drn {

// Bad flags, unknown config keys or values of the wrong type.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Flat configuration with dotted keys ("train.lr", "net.width_multiplier").
// Every key has a default; config files and flags may only override known
// keys, with values of the default's JSON type.
class RunConfig {
public:
    RunConfig();

    static const nlohmann::json &defaults();

    void merge(const nlohmann::json &flat);
    void merge_file(const std::filesystem::path &path);
    void set(const std::string &key, const nlohmann::json &value);
    // Parses text according to the type of the key's default.
    void set_from_string(const std::string &key, const std::string &text);
    // "key=value"
    void apply_override(const std::string &assignment);

    template <typename T>
    T get(const std::string &key) const
    {
        return values_.at(key).get<T>();
    }

    const nlohmann::json &values() const { return values_; }
    void save(const std::filesystem::path &path) const;

private:
    nlohmann::json values_;
};

}  // namespace drn

#endif
