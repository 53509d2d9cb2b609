#ifndef DRN_CHECKPOINT_HPP
#define DRN_CHECKPOINT_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

namespace drn {

// Single-file container: 8-byte magic "DRNCKPT1", little-endian u64 header
// length, JSON header (stage, iteration, config, config hash, tensor index),
// then the raw tensor bytes in index order.
struct CheckpointBundle {
    std::string stage;
    int64_t iteration = 0;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json state = nlohmann::json::object();  // RNG and loop bookkeeping
    std::vector<std::pair<std::string, torch::Tensor>> tensors;

    void add(const std::string &name, const torch::Tensor &t);
    bool contains(const std::string &name) const;
    const torch::Tensor &at(const std::string &name) const;

    std::string config_hash() const;

    void save(const std::filesystem::path &path) const;
    static CheckpointBundle load(const std::filesystem::path &path);
};

// Parameters and buffers of a module under "<prefix>.<name>".
void store_module(CheckpointBundle &bundle, const std::string &prefix, const torch::nn::Module &module);
// Copies tensors back by name; throws on a missing entry or a shape mismatch.
void restore_module(const CheckpointBundle &bundle, const std::string &prefix, torch::nn::Module &module);

void store_adam(CheckpointBundle &bundle, const std::string &prefix, torch::optim::Adam &optimizer);
void restore_adam(const CheckpointBundle &bundle, const std::string &prefix, torch::optim::Adam &optimizer);

// FNV-1a over the bytes of every parameter, for freeze and no-op checks.
uint64_t parameter_hash(const torch::nn::Module &module);
uint64_t fnv1a(const void *data, size_t size, uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace drn

#endif
