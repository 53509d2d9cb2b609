#include "drn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace drn {

namespace {

constexpr std::array<char, 8> kMagic = {'D', 'R', 'N', 'C', 'K', 'P', 'T', '1'};

std::string dtype_name(torch::ScalarType t)
{
    switch (t) {
    case torch::kFloat32: return "float32";
    case torch::kFloat64: return "float64";
    case torch::kInt64: return "int64";
    case torch::kUInt8: return "uint8";
    default: throw std::invalid_argument("checkpoint cannot store dtype " + std::string(c10::toString(t)));
    }
}

torch::ScalarType dtype_from_name(const std::string &name)
{
    if (name == "float32") return torch::kFloat32;
    if (name == "float64") return torch::kFloat64;
    if (name == "int64") return torch::kInt64;
    if (name == "uint8") return torch::kUInt8;
    throw std::runtime_error("checkpoint has unknown dtype '" + name + "'");
}

void write_u64(std::ostream &out, uint64_t v)
{
    static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");
    out.write(reinterpret_cast<const char *>(&v), sizeof(v));
}

}  // namespace

void CheckpointBundle::add(const std::string &name, const torch::Tensor &t)
{
    if (contains(name)) throw std::invalid_argument("duplicate checkpoint tensor '" + name + "'");
    tensors.emplace_back(name, t.detach().cpu().contiguous().clone());
}

bool CheckpointBundle::contains(const std::string &name) const
{
    for (const auto &entry : tensors) {
        if (entry.first == name) return true;
    }
    return false;
}

const torch::Tensor &CheckpointBundle::at(const std::string &name) const
{
    for (const auto &entry : tensors) {
        if (entry.first == name) return entry.second;
    }
    throw std::out_of_range("checkpoint has no tensor '" + name + "'");
}

uint64_t fnv1a(const void *data, size_t size, uint64_t seed)
{
    uint64_t h = seed;
    const auto *p = static_cast<const unsigned char *>(data);
    for (size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string CheckpointBundle::config_hash() const
{
    const std::string text = config.dump();
    std::ostringstream out;
    out << std::hex << fnv1a(text.data(), text.size());
    return out.str();
}

void CheckpointBundle::save(const std::filesystem::path &path) const
{
    nlohmann::json index = nlohmann::json::array();
    uint64_t offset = 0;
    for (const auto &[name, t] : tensors) {
        const uint64_t nbytes = t.numel() * t.element_size();
        index.push_back({{"name", name}, {"dtype", dtype_name(t.scalar_type())}, {"shape", t.sizes().vec()},
                         {"offset", offset}, {"nbytes", nbytes}});
        offset += nbytes;
    }
    nlohmann::json header = {{"format", 1},        {"stage", stage}, {"iteration", iteration},
                             {"config", config},   {"config_hash", config_hash()},
                             {"state", state},     {"tensors", index}};
    const std::string text = header.dump();

    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
        out.write(kMagic.data(), kMagic.size());
        write_u64(out, text.size());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        for (const auto &entry : tensors) {
            const auto &t = entry.second;
            out.write(static_cast<const char *>(t.data_ptr()), static_cast<std::streamsize>(t.numel() * t.element_size()));
        }
        if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

CheckpointBundle CheckpointBundle::load(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("missing checkpoint: " + path.string());
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw std::runtime_error(path.string() + " is not a DRN checkpoint");
    uint64_t header_size = 0;
    in.read(reinterpret_cast<char *>(&header_size), sizeof(header_size));
    std::string text(header_size, '\0');
    in.read(text.data(), static_cast<std::streamsize>(header_size));
    if (!in) throw std::runtime_error("truncated checkpoint header in " + path.string());

    const auto header = nlohmann::json::parse(text);
    CheckpointBundle bundle;
    bundle.stage = header.at("stage").get<std::string>();
    bundle.iteration = header.at("iteration").get<int64_t>();
    bundle.config = header.at("config");
    bundle.state = header.at("state");
    for (const auto &entry : header.at("tensors")) {
        const auto shape = entry.at("shape").get<std::vector<int64_t>>();
        auto t = torch::empty(shape, torch::TensorOptions().dtype(dtype_from_name(entry.at("dtype"))));
        const auto nbytes = entry.at("nbytes").get<uint64_t>();
        if (nbytes != static_cast<uint64_t>(t.numel() * t.element_size())) {
            throw std::runtime_error("checkpoint entry '" + entry.at("name").get<std::string>() + "' has bad size");
        }
        in.read(static_cast<char *>(t.data_ptr()), static_cast<std::streamsize>(nbytes));
        if (!in) throw std::runtime_error("truncated checkpoint data in " + path.string());
        bundle.tensors.emplace_back(entry.at("name").get<std::string>(), t);
    }
    return bundle;
}

void store_module(CheckpointBundle &bundle, const std::string &prefix, const torch::nn::Module &module)
{
    for (const auto &p : module.named_parameters()) bundle.add(prefix + "." + p.key(), p.value());
    for (const auto &b : module.named_buffers()) bundle.add(prefix + "." + b.key(), b.value());
}

void restore_module(const CheckpointBundle &bundle, const std::string &prefix, torch::nn::Module &module)
{
    torch::NoGradGuard guard;
    auto copy = [&](const std::string &key, torch::Tensor &dst) {
        const auto &src = bundle.at(prefix + "." + key);
        if (src.sizes() != dst.sizes()) {
            throw std::runtime_error("checkpoint tensor '" + prefix + "." + key + "' has shape " +
                                     c10::str(src.sizes()) + ", module expects " + c10::str(dst.sizes()));
        }
        dst.copy_(src);
    };
    for (auto &p : module.named_parameters()) copy(p.key(), p.value());
    for (auto &b : module.named_buffers()) copy(b.key(), b.value());
}

void store_adam(CheckpointBundle &bundle, const std::string &prefix, torch::optim::Adam &optimizer)
{
    auto &groups = optimizer.param_groups();
    auto &state = optimizer.state();
    int64_t index = 0;
    for (auto &group : groups) {
        for (auto &p : group.params()) {
            const std::string key = prefix + "." + std::to_string(index++);
            auto it = state.find(p.unsafeGetTensorImpl());
            if (it == state.end()) continue;
            auto &s = static_cast<torch::optim::AdamParamState &>(*it->second);
            bundle.add(key + ".step", torch::tensor({s.step()}, torch::kInt64));
            bundle.add(key + ".exp_avg", s.exp_avg());
            bundle.add(key + ".exp_avg_sq", s.exp_avg_sq());
        }
    }
}

void restore_adam(const CheckpointBundle &bundle, const std::string &prefix, torch::optim::Adam &optimizer)
{
    auto &state = optimizer.state();
    int64_t index = 0;
    for (auto &group : optimizer.param_groups()) {
        for (auto &p : group.params()) {
            const std::string key = prefix + "." + std::to_string(index++);
            if (!bundle.contains(key + ".step")) continue;
            auto s = std::make_unique<torch::optim::AdamParamState>();
            s->step(bundle.at(key + ".step").item<int64_t>());
            s->exp_avg(bundle.at(key + ".exp_avg").clone());
            s->exp_avg_sq(bundle.at(key + ".exp_avg_sq").clone());
            state[p.unsafeGetTensorImpl()] = std::move(s);
        }
    }
}

uint64_t parameter_hash(const torch::nn::Module &module)
{
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto &p : module.named_parameters()) {
        auto t = p.value().detach().contiguous();
        h = fnv1a(p.key().data(), p.key().size(), h);
        h = fnv1a(t.data_ptr(), t.numel() * t.element_size(), h);
    }
    return h;
}

}  // namespace drn
