#include "drn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

namespace drn {

namespace {

// Portable uniform doubles: std distributions are implementation-defined.
class Uniform {
public:
    explicit Uniform(uint64_t seed) : engine_(seed) {}
    double operator()() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double operator()(double lo, double hi) { return lo + (hi - lo) * (*this)(); }
    uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

uint64_t splitmix64(uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double lattice_value(uint64_t seed, int64_t ix, int64_t iy)
{
    const uint64_t h = splitmix64(seed ^ splitmix64(static_cast<uint64_t>(ix) * 0x632be59bd9b4e019ULL +
                                                    static_cast<uint64_t>(iy)));
    return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

// Smooth value noise in [-1,1] on an 8-pixel lattice plus a faint per-pixel
// grain, fixed per scene so every light sees the same surface.
double texture_noise(uint64_t seed, int64_t px, int64_t py)
{
    constexpr int64_t cell = 8;
    const int64_t ix = px / cell, iy = py / cell;
    const double fx = (static_cast<double>(px % cell) + 0.5) / cell;
    const double fy = (static_cast<double>(py % cell) + 0.5) / cell;
    const double sx = fx * fx * (3.0 - 2.0 * fx);
    const double sy = fy * fy * (3.0 - 2.0 * fy);
    const double a = lattice_value(seed, ix, iy), b = lattice_value(seed, ix + 1, iy);
    const double c = lattice_value(seed, ix, iy + 1), d = lattice_value(seed, ix + 1, iy + 1);
    const double smooth = (a * (1 - sx) + b * sx) * (1 - sy) + (c * (1 - sx) + d * sx) * sy;
    const double grain = lattice_value(seed ^ 0xabcdefULL, px, py);
    return 0.75 * smooth + 0.25 * grain;
}

bool inside(const SceneObject &obj, double x, double y)
{
    if (obj.shape == Shape::box) {
        return std::abs(x - obj.cx) <= obj.size && std::abs(y - obj.cy) <= obj.size;
    }
    const double dx = x - obj.cx, dy = y - obj.cy;
    return dx * dx + dy * dy <= obj.size * obj.size;
}

// Does the segment p + t*d, t in [0, len], touch the object?
bool segment_hits(const SceneObject &obj, double px, double py, double dx, double dy, double len)
{
    if (len <= 0.0) return false;
    if (obj.shape == Shape::box) {
        double t0 = 0.0, t1 = len;
        const double lo[2] = {obj.cx - obj.size, obj.cy - obj.size};
        const double hi[2] = {obj.cx + obj.size, obj.cy + obj.size};
        const double p[2] = {px, py};
        const double d[2] = {dx, dy};
        for (int axis = 0; axis < 2; ++axis) {
            if (std::abs(d[axis]) < 1e-12) {
                if (p[axis] < lo[axis] || p[axis] > hi[axis]) return false;
                continue;
            }
            double ta = (lo[axis] - p[axis]) / d[axis];
            double tb = (hi[axis] - p[axis]) / d[axis];
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
            if (t0 > t1) return false;
        }
        return true;
    }
    const double t = std::clamp((obj.cx - px) * dx + (obj.cy - py) * dy, 0.0, len);
    const double ex = px + t * dx - obj.cx, ey = py + t * dy - obj.cy;
    return ex * ex + ey * ey <= obj.size * obj.size;
}

void write_text(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

}  // namespace

SceneSpec SceneSpec::random(uint64_t seed)
{
    Uniform u(splitmix64(seed));
    SceneSpec spec;
    spec.seed = seed;
    for (double &c : spec.floor_albedo) c = u(0.35, 0.85);
    const int n = 2 + static_cast<int>(u.bits() % 5);
    for (int i = 0; i < n; ++i) {
        SceneObject obj;
        obj.shape = (u.bits() & 1) ? Shape::disk : Shape::box;
        obj.size = u(0.06, 0.13);
        const double margin = obj.size + 0.02;
        obj.cx = u(margin, 1.0 - margin);
        obj.cy = u(margin, 1.0 - margin);
        for (double &c : obj.albedo) c = u(0.15, 0.85);
        spec.objects.push_back(obj);
    }
    spec.validate();
    return spec;
}

void SceneSpec::validate() const
{
    if (objects.empty() || objects.size() > 6) {
        throw std::invalid_argument("scene needs 1-6 objects, has " + std::to_string(objects.size()));
    }
    auto check_albedo = [](const Rgb &rgb) {
        for (double c : rgb) {
            if (!(c >= 0.1 && c <= 0.9)) throw std::invalid_argument("albedo outside [0.1, 0.9]");
        }
    };
    check_albedo(floor_albedo);
    for (const auto &obj : objects) {
        check_albedo(obj.albedo);
        if (obj.size <= 0.0 || obj.cx - obj.size < 0.0 || obj.cx + obj.size > 1.0 || obj.cy - obj.size < 0.0 ||
            obj.cy + obj.size > 1.0) {
            throw std::invalid_argument("scene object leaves the canvas");
        }
    }
}

void RenderConfig::validate() const
{
    if (resolution < 16 || resolution % 16 != 0) {
        throw DimensionError("resolution " + std::to_string(resolution) + " is not divisible by 16");
    }
    if (shadow_length < 0.0) throw std::invalid_argument("shadow_length must be >= 0");
    if (!(ambient >= 0.0 && ambient <= 1.0)) throw std::invalid_argument("ambient must lie in [0,1]");
    if (!(direct >= 0.0 && direct <= 1.0)) throw std::invalid_argument("direct must lie in [0,1]");
    if (!(texture >= 0.0 && texture < 1.0)) throw std::invalid_argument("texture must lie in [0,1)");
}

Rgb kelvin_to_rgb(double kelvin)
{
    if (!(kelvin >= 1000.0 && kelvin <= 12000.0)) {
        throw std::invalid_argument("color temperature " + std::to_string(kelvin) + "K outside [1000, 12000]");
    }
    const double t = kelvin / 100.0;
    double r, g, b;
    if (t <= 66.0) {
        r = 255.0;
        g = 99.4708025861 * std::log(t) - 161.1195681661;
    } else {
        r = 329.698727446 * std::pow(t - 60.0, -0.1332047592);
        g = 288.1221695283 * std::pow(t - 60.0, -0.0755148492);
    }
    if (t >= 66.0) {
        b = 255.0;
    } else if (t <= 19.0) {
        b = 0.0;
    } else {
        b = 138.5177312231 * std::log(t - 10.0) - 305.0447927307;
    }
    Rgb rgb{r, g, b};
    // Floor at one byte so every channel stays strictly positive.
    for (double &c : rgb) c = std::clamp(c, 1.0, 255.0);
    const double peak = std::max({rgb[0], rgb[1], rgb[2]});
    for (double &c : rgb) c /= peak;
    return rgb;
}

std::array<double, 2> light_vector(Direction direction)
{
    constexpr double h = std::numbers::sqrt2 / 2.0;
    switch (direction) {
    case Direction::N: return {0.0, -1.0};
    case Direction::NE: return {h, -h};
    case Direction::E: return {1.0, 0.0};
    case Direction::SE: return {h, h};
    case Direction::S: return {0.0, 1.0};
    case Direction::SW: return {-h, h};
    case Direction::W: return {-1.0, 0.0};
    case Direction::NW: return {-h, -h};
    }
    throw std::invalid_argument("bad direction");
}

torch::Tensor shadow_mask(const SceneSpec &spec, Direction direction, const RenderConfig &cfg)
{
    cfg.validate();
    const int64_t n = cfg.resolution;
    const auto [dx, dy] = light_vector(direction);
    auto mask = torch::zeros({n, n}, torch::kBool);
    auto acc = mask.accessor<bool, 2>();
    for (int64_t j = 0; j < n; ++j) {
        for (int64_t i = 0; i < n; ++i) {
            const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            const double y = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
            bool on_object = false, blocked = false;
            for (const auto &obj : spec.objects) {
                on_object = on_object || inside(obj, x, y);
                blocked = blocked || segment_hits(obj, x, y, dx, dy, cfg.shadow_length);
            }
            acc[j][i] = blocked && !on_object;
        }
    }
    return mask;
}

ImageTensor render(const SceneSpec &spec, const LightSetting &light, const RenderConfig &cfg)
{
    spec.validate();
    cfg.validate();
    const int64_t n = cfg.resolution;
    const Rgb tint = kelvin_to_rgb(light.kelvin);
    auto shadow = shadow_mask(spec, light.direction, cfg);
    auto sh = shadow.accessor<bool, 2>();
    auto img = torch::zeros({3, n, n}, torch::kFloat32);
    auto px = img.accessor<float, 3>();
    for (int64_t j = 0; j < n; ++j) {
        for (int64_t i = 0; i < n; ++i) {
            const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            const double y = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
            Rgb albedo = spec.floor_albedo;
            for (const auto &obj : spec.objects) {
                if (inside(obj, x, y)) albedo = obj.albedo;
            }
            const double grain = 1.0 + cfg.texture * texture_noise(spec.seed, i, j);
            const double light_level = cfg.ambient + (sh[j][i] ? 0.0 : cfg.direct);
            for (int c = 0; c < 3; ++c) {
                const double a = std::clamp(albedo[c] * grain, 0.1, 0.9);
                px[c][j][i] = static_cast<float>(std::clamp(a * tint[c] * light_level, 0.0, 1.0));
            }
        }
    }
    return {img, Range::unit};
}

nlohmann::json Manifest::to_json() const
{
    return {
        {"scenes", scenes},
        {"split", {{"train", train}, {"val", val}}},
        {"target", {{"direction", std::string(to_string(target.direction))}, {"kelvin", target.kelvin}}},
        {"seed", seed},
        {"render",
         {{"resolution", render.resolution},
          {"shadow_length", render.shadow_length},
          {"ambient", render.ambient},
          {"direct", render.direct},
          {"texture", render.texture}}},
    };
}

Manifest Manifest::from_json(const nlohmann::json &j)
{
    Manifest m;
    m.scenes = j.at("scenes").get<std::vector<std::string>>();
    m.train = j.at("split").at("train").get<std::vector<std::string>>();
    m.val = j.at("split").at("val").get<std::vector<std::string>>();
    m.target = LightSetting(parse_direction(j.at("target").at("direction").get<std::string>()),
                            j.at("target").at("kelvin").get<int>());
    m.seed = j.value("seed", uint64_t{0});
    if (j.contains("render")) {
        const auto &r = j.at("render");
        m.render.resolution = r.value("resolution", m.render.resolution);
        m.render.shadow_length = r.value("shadow_length", m.render.shadow_length);
        m.render.ambient = r.value("ambient", m.render.ambient);
        m.render.direct = r.value("direct", m.render.direct);
        m.render.texture = r.value("texture", m.render.texture);
    }
    return m;
}

Manifest Manifest::load(const std::filesystem::path &root)
{
    const auto path = root / "manifest.json";
    std::ifstream in(path);
    if (!in) throw IoError("missing manifest: " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception &e) {
        throw IoError("malformed manifest " + path.string() + ": " + e.what());
    }
}

void Manifest::save(const std::filesystem::path &root) const
{
    write_text(root / "manifest.json", to_json().dump(2) + "\n");
}

std::string scene_id(size_t index)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene%04zu", index);
    return buf;
}

SceneBundle load_scene(const std::filesystem::path &scene_dir, const std::string &id)
{
    SceneBundle bundle{id, {}};
    for (const auto &light : light_grid()) {
        const auto path = scene_dir / (light.stem() + ".png");
        if (std::filesystem::exists(path)) bundle.images.emplace_back(light, load_png(path));
    }
    if (bundle.images.empty()) throw IoError("no renders found in " + scene_dir.string());
    return bundle;
}

ImageTensor fuse_scene(const std::filesystem::path &scene_dir, const std::string &id)
{
    auto fused = exposure_fuse(load_scene(scene_dir, id));
    save_png(fused, scene_dir / "shadow_free.png");
    return fused;
}

Manifest generate_dataset(size_t n_scenes, const RenderConfig &cfg, const std::filesystem::path &root,
                          uint64_t seed, double train_ratio)
{
    cfg.validate();
    if (!(train_ratio >= 0.0 && train_ratio <= 1.0)) throw std::invalid_argument("train ratio must lie in [0,1]");
    std::filesystem::create_directories(root);
    Manifest manifest;
    manifest.seed = seed;
    manifest.render = cfg;
    auto n_train = static_cast<size_t>(std::llround(train_ratio * static_cast<double>(n_scenes)));
    // Any ratio below 1 keeps at least one held-out scene.
    if (train_ratio < 1.0 && n_scenes >= 2) n_train = std::min(n_train, n_scenes - 1);
    for (size_t s = 0; s < n_scenes; ++s) {
        const std::string id = scene_id(s);
        const auto dir = root / id;
        std::filesystem::create_directories(dir);
        const auto spec = SceneSpec::random(splitmix64(seed) ^ splitmix64(s + 1));
        SceneBundle bundle{id, {}};
        for (const auto &light : light_grid()) {
            auto img = quantize(render(spec, light, cfg));
            save_png(img, dir / (light.stem() + ".png"));
            bundle.images.emplace_back(light, std::move(img));
        }
        save_png(exposure_fuse(bundle), dir / "shadow_free.png");
        manifest.scenes.push_back(id);
        (s < n_train ? manifest.train : manifest.val).push_back(id);
    }
    manifest.save(root);
    return manifest;
}

PairStream::PairStream(std::filesystem::path root, Manifest manifest, LightSetting target, Split split)
    : root_(std::move(root)), manifest_(std::move(manifest)), target_(target)
{
    switch (split) {
    case Split::train: scenes_ = manifest_.train; break;
    case Split::val: scenes_ = manifest_.val; break;
    case Split::all: scenes_ = manifest_.scenes; break;
    }
}

std::optional<RelightPair> PairStream::next()
{
    while (scene_index_ < scenes_.size()) {
        const auto &id = scenes_[scene_index_];
        if (!current_) {
            const auto dir = root_ / id;
            if (!std::filesystem::exists(dir / "shadow_free.png")) {
                throw IoError("scene " + id + " is missing " + (dir / "shadow_free.png").string());
            }
            current_ = load_scene(dir, id);
            current_target_.reset();
            for (const auto &[light, img] : current_->images) {
                if (light == target_) current_target_ = img;
            }
            if (!current_target_) throw IoError("scene " + id + " has no " + target_.stem() + ".png");
            current_sf_ = load_png(dir / "shadow_free.png");
            light_index_ = 0;
        }
        if (light_index_ < current_->images.size()) {
            const auto &[light, img] = current_->images[light_index_++];
            return RelightPair{id, light, img, *current_target_, *current_sf_};
        }
        current_.reset();
        ++scene_index_;
    }
    return std::nullopt;
}

PairStream load_pairs(const std::filesystem::path &root, LightSetting target, Split split)
{
    return PairStream(root, Manifest::load(root), target, split);
}

}  // namespace drn
