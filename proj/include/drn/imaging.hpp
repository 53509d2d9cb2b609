#ifndef DRN_IMAGING_HPP
#define DRN_IMAGING_HPP

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <torch/torch.h>

namespace drn {

// Value range carried by an image: unit is [0,1] (IO, metrics, rectifier),
// model is [-1,1] (network inputs and tanh outputs).
enum class Range { unit, model };

std::string_view to_string(Range range);

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class RangeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Planar RGB raster [3,H,W], float32. H and W are multiples of 16 so the
// encoders can halve them four times.
class ImageTensor {
public:
    ImageTensor(torch::Tensor data, Range range);

    const torch::Tensor &data() const { return data_; }
    Range range() const { return range_; }
    int64_t height() const { return data_.size(1); }
    int64_t width() const { return data_.size(2); }

    // [1,3,H,W] view for network calls.
    torch::Tensor batched() const { return data_.unsqueeze(0); }

private:
    torch::Tensor data_;
    Range range_;
};

// Activation tensor [C,H,W] with finite entries.
class FeatureMap {
public:
    explicit FeatureMap(torch::Tensor data);

    const torch::Tensor &data() const { return data_; }
    int64_t channels() const { return data_.size(0); }
    int64_t height() const { return data_.size(1); }
    int64_t width() const { return data_.size(2); }

private:
    torch::Tensor data_;
};

enum class Direction { N, NE, E, SE, S, SW, W, NW };

inline constexpr std::array<Direction, 8> kDirections = {
    Direction::N, Direction::NE, Direction::E, Direction::SE,
    Direction::S, Direction::SW, Direction::W, Direction::NW};

inline constexpr std::array<int, 5> kTemperatures = {2500, 3500, 4500, 5500, 6500};

std::string_view to_string(Direction direction);
Direction parse_direction(std::string_view text);

struct LightSetting {
    Direction direction = Direction::E;
    int kelvin = 4500;

    LightSetting() = default;
    LightSetting(Direction direction_, int kelvin_);

    // "E_4500"
    std::string stem() const;
    static LightSetting parse(std::string_view stem);

    friend bool operator==(const LightSetting &, const LightSetting &) = default;
    friend auto operator<=>(const LightSetting &, const LightSetting &) = default;
};

// The any-to-one target: light from the East at 4500 K.
LightSetting default_target();

// All 40 settings, direction-major in kDirections order.
std::array<LightSetting, 40> light_grid();

void check_image_dims(int64_t height, int64_t width);

ImageTensor load_png(const std::filesystem::path &path);
void save_png(const ImageTensor &img, const std::filesystem::path &path);

// Round to the nearest byte (halves away from zero) and back to [0,1].
ImageTensor quantize(const ImageTensor &img);
// [3,H,W] float in [0,1] -> uint8 bytes, same rounding as save_png.
torch::Tensor to_bytes(const torch::Tensor &unit);

ImageTensor to_model_range(const ImageTensor &img);
ImageTensor from_model_range(const ImageTensor &img);

}  // namespace drn

#endif
