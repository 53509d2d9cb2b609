#ifndef DRN_DATAGEN_HPP
#define DRN_DATAGEN_HPP

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "drn/fusion.hpp"
#include "drn/imaging.hpp"

namespace drn {

using Rgb = std::array<double, 3>;

enum class Shape { box, disk };

struct SceneObject {
    Shape shape = Shape::box;
    // Center and half-extent (box) or radius (disk), in canvas units [0,1].
    double cx = 0.5;
    double cy = 0.5;
    double size = 0.1;
    Rgb albedo{0.5, 0.5, 0.5};
};

struct SceneSpec {
    uint64_t seed = 0;
    std::vector<SceneObject> objects;
    Rgb floor_albedo{0.5, 0.5, 0.5};

    // 2-6 objects with albedos in [0.15, 0.85], drawn from the seed.
    static SceneSpec random(uint64_t seed);
    // Objects inside the canvas, albedos within [0.1, 0.9].
    void validate() const;
};

struct RenderConfig {
    int64_t resolution = 64;
    double shadow_length = 0.3;  // canvas units
    double ambient = 0.25;
    double direct = 0.75;
    // Relative amplitude of the fixed per-scene albedo texture.
    double texture = 0.15;

    void validate() const;
};

// Blackbody tint from the usual piecewise fit of the Planckian locus,
// normalised so the largest channel is 1. Valid for 1000-12000 K.
Rgb kelvin_to_rgb(double kelvin);

// Unit vector pointing from the scene towards the light, image axes
// (x right, y down).
std::array<double, 2> light_vector(Direction direction);

// Floor pixels that the light cannot reach, [H,W] bool.
torch::Tensor shadow_mask(const SceneSpec &spec, Direction direction, const RenderConfig &cfg);

// Top-down flat-land render: albedo * tint * (ambient + direct * lit).
// Objects are always lit; they cast hard shadows of length shadow_length away
// from the light onto the floor.
ImageTensor render(const SceneSpec &spec, const LightSetting &light, const RenderConfig &cfg);

struct Manifest {
    std::vector<std::string> scenes;
    std::vector<std::string> train;
    std::vector<std::string> val;
    LightSetting target = default_target();
    uint64_t seed = 0;
    RenderConfig render;

    nlohmann::json to_json() const;
    static Manifest from_json(const nlohmann::json &j);
    static Manifest load(const std::filesystem::path &root);
    void save(const std::filesystem::path &root) const;
};

std::string scene_id(size_t index);

// Renders n_scenes scenes (40 PNGs each plus shadow_free.png) under root and
// writes manifest.json. The first round(train_ratio * n) scenes (at most n - 1
// when the ratio is below 1) form the training split.
Manifest generate_dataset(size_t n_scenes, const RenderConfig &cfg, const std::filesystem::path &root,
                          uint64_t seed, double train_ratio = 0.9);

// Loads every light of one scene directory.
SceneBundle load_scene(const std::filesystem::path &scene_dir, const std::string &id);

// Fuses all renders of a scene and writes <scene_dir>/shadow_free.png.
ImageTensor fuse_scene(const std::filesystem::path &scene_dir, const std::string &id);

struct RelightPair {
    std::string scene_id;
    LightSetting input_light;
    ImageTensor input;        // X
    ImageTensor target;       // Y
    ImageTensor shadow_free;  // Y_sf
};

enum class Split { train, val, all };

// Streams (X, Y, Y_sf) for every light of every scene in the chosen split,
// scene by scene; each scene's images are read when the stream reaches it.
class PairStream {
public:
    PairStream(std::filesystem::path root, Manifest manifest, LightSetting target, Split split);
    std::optional<RelightPair> next();
    const Manifest &manifest() const { return manifest_; }

private:
    std::filesystem::path root_;
    Manifest manifest_;
    LightSetting target_;
    std::vector<std::string> scenes_;
    size_t scene_index_ = 0;
    size_t light_index_ = 0;
    std::optional<SceneBundle> current_;
    std::optional<ImageTensor> current_target_;
    std::optional<ImageTensor> current_sf_;
};

PairStream load_pairs(const std::filesystem::path &root, LightSetting target = default_target(),
                      Split split = Split::all);

}  // namespace drn

#endif
