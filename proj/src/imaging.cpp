#include "drn/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include <png.h>

namespace drn {

std::string_view to_string(Range range)
{
    return range == Range::unit ? "unit" : "model";
}

void check_image_dims(int64_t height, int64_t width)
{
    auto check = [](int64_t size, const char *axis) {
        if (size < 16 || size % 16 != 0) {
            throw DimensionError(std::string(axis) + " = " + std::to_string(size) +
                                 " is not a positive multiple of 16");
        }
    };
    check(height, "height");
    check(width, "width");
}

ImageTensor::ImageTensor(torch::Tensor data, Range range) : range_(range)
{
    if (data.dim() != 3 || data.size(0) != 3) {
        throw DimensionError("image tensor must have shape [3,H,W], got " + c10::str(data.sizes()));
    }
    check_image_dims(data.size(1), data.size(2));
    data_ = data.detach().to(torch::kFloat32).contiguous().clone();
    const float lo = range == Range::unit ? 0.0f : -1.0f;
    const auto [mn, mx] = torch::aminmax(data_);
    if (!(mn.item<float>() >= lo) || !(mx.item<float>() <= 1.0f)) {
        throw RangeError("image values [" + std::to_string(mn.item<float>()) + ", " +
                         std::to_string(mx.item<float>()) + "] outside " +
                         std::string(to_string(range)) + " range");
    }
}

FeatureMap::FeatureMap(torch::Tensor data)
{
    if (data.dim() != 3 || data.size(0) < 1) {
        throw DimensionError("feature map must have shape [C,H,W] with C >= 1, got " +
                             c10::str(data.sizes()));
    }
    if (!torch::isfinite(data).all().item<bool>()) {
        throw RangeError("feature map contains non-finite values");
    }
    data_ = data.detach().contiguous();
}

namespace {

constexpr std::array<std::string_view, 8> kDirectionNames = {"N", "NE", "E", "SE", "S", "SW", "W", "NW"};

}  // namespace

std::string_view to_string(Direction direction)
{
    return kDirectionNames[static_cast<size_t>(direction)];
}

Direction parse_direction(std::string_view text)
{
    for (size_t i = 0; i < kDirectionNames.size(); ++i) {
        if (kDirectionNames[i] == text) return static_cast<Direction>(i);
    }
    throw std::invalid_argument("unknown light direction '" + std::string(text) + "'");
}

LightSetting::LightSetting(Direction direction_, int kelvin_) : direction(direction_), kelvin(kelvin_)
{
    if (std::find(kTemperatures.begin(), kTemperatures.end(), kelvin) == kTemperatures.end()) {
        throw std::invalid_argument("unsupported color temperature " + std::to_string(kelvin) + "K");
    }
}

std::string LightSetting::stem() const
{
    return std::string(to_string(direction)) + "_" + std::to_string(kelvin);
}

LightSetting LightSetting::parse(std::string_view stem)
{
    const auto sep = stem.find('_');
    if (sep == std::string_view::npos) {
        throw std::invalid_argument("light setting '" + std::string(stem) + "' is not <dir>_<kelvin>");
    }
    int kelvin = 0;
    try {
        kelvin = std::stoi(std::string(stem.substr(sep + 1)));
    } catch (const std::exception &) {
        throw std::invalid_argument("light setting '" + std::string(stem) + "' has no kelvin value");
    }
    return {parse_direction(stem.substr(0, sep)), kelvin};
}

LightSetting default_target() { return {Direction::E, 4500}; }

std::array<LightSetting, 40> light_grid()
{
    std::array<LightSetting, 40> grid;
    size_t i = 0;
    for (Direction d : kDirections) {
        for (int k : kTemperatures) grid[i++] = LightSetting(d, k);
    }
    return grid;
}

torch::Tensor to_bytes(const torch::Tensor &unit)
{
    // floor(x*255 + 0.5) is round-half-away-from-zero for x >= 0.
    auto scaled = unit.detach().to(torch::kFloat64).clamp(0.0, 1.0) * 255.0;
    return torch::floor(scaled + 0.5).to(torch::kUInt8);
}

ImageTensor quantize(const ImageTensor &img)
{
    if (img.range() != Range::unit) throw RangeError("quantize expects a unit-range image");
    return {to_bytes(img.data()).to(torch::kFloat32) / 255.0f, Range::unit};
}

ImageTensor load_png(const std::filesystem::path &path)
{
    if (!std::filesystem::exists(path)) {
        throw IoError("missing file: " + path.string());
    }
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    const auto native = image.format;
    if ((native & PNG_FORMAT_FLAG_COLOR) == 0 || (native & PNG_FORMAT_FLAG_ALPHA) != 0 ||
        (native & PNG_FORMAT_FLAG_LINEAR) != 0 || (native & PNG_FORMAT_FLAG_COLORMAP) != 0) {
        png_image_free(&image);
        throw IoError("PNG " + path.string() + " is not 8-bit RGB");
    }
    const int64_t height = image.height;
    const int64_t width = image.width;
    try {
        check_image_dims(height, width);
    } catch (const DimensionError &e) {
        png_image_free(&image);
        throw DimensionError(path.string() + ": " + e.what());
    }
    image.format = PNG_FORMAT_RGB;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        const std::string message = image.message;
        png_image_free(&image);
        throw IoError("cannot decode PNG " + path.string() + ": " + message);
    }
    auto hwc = torch::from_blob(buffer.data(), {height, width, 3}, torch::kUInt8);
    auto chw = hwc.permute({2, 0, 1}).to(torch::kFloat32) / 255.0f;
    return {chw, Range::unit};
}

void save_png(const ImageTensor &img, const std::filesystem::path &path)
{
    if (img.range() != Range::unit) throw RangeError("save_png expects a unit-range image");
    auto hwc = to_bytes(img.data()).permute({1, 2, 0}).contiguous();
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.c_str(), 0, hwc.data_ptr<uint8_t>(), 0, nullptr)) {
        throw IoError("cannot write PNG " + path.string() + ": " + image.message);
    }
}

ImageTensor to_model_range(const ImageTensor &img)
{
    if (img.range() != Range::unit) throw RangeError("to_model_range expects a unit-range image");
    return {(img.data() * 2.0f - 1.0f).clamp(-1.0f, 1.0f), Range::model};
}

ImageTensor from_model_range(const ImageTensor &img)
{
    if (img.range() != Range::model) throw RangeError("from_model_range expects a model-range image");
    return {((img.data() + 1.0f) * 0.5f).clamp(0.0f, 1.0f), Range::unit};
}

}  // namespace drn
