#include "test_main.hpp"

#include <filesystem>
#include <cstring>
#include <fstream>

#include <png.h>

#include "drn/imaging.hpp"

using namespace drn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name)
{
    auto dir = fs::temp_directory_path() / "drn_test_imaging";
    fs::create_directories(dir);
    return dir / name;
}

void write_raw_png(const fs::path &path, uint32_t height, uint32_t width, uint32_t format)
{
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = width;
    image.height = height;
    image.format = format;
    std::vector<uint8_t> buffer(PNG_IMAGE_SIZE(image), 100);
    REQUIRE(png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr));
}

}  // namespace

TEST_CASE("black and white PNGs load as zeros and ones")
{
    save_png(ImageTensor(torch::zeros({3, 16, 16}), Range::unit), scratch("black.png"));
    save_png(ImageTensor(torch::ones({3, 16, 16}), Range::unit), scratch("white.png"));
    auto black = load_png(scratch("black.png"));
    auto white = load_png(scratch("white.png"));
    CHECK(black.range() == Range::unit);
    CHECK(black.data().abs().max().item<float>() == 0.0f);
    CHECK((white.data() == 1.0f).all().item<bool>());
}

TEST_CASE("single byte 128 reads back as 128/255")
{
    auto t = torch::zeros({3, 16, 16});
    t[1][3][5] = 128.0f / 255.0f;
    save_png(ImageTensor(t, Range::unit), scratch("px.png"));
    auto img = load_png(scratch("px.png"));
    CHECK(img.data()[1][3][5].item<float>() == doctest::Approx(0.50196).epsilon(1e-5));
    CHECK(img.data()[1][3][5].item<float>() == 128.0f / 255.0f);
}

TEST_CASE("0.5 quantizes to byte 128 with halves rounded away from zero")
{
    auto t = torch::full({3, 16, 16}, 0.5f);
    CHECK(to_bytes(t)[0][0][0].item<uint8_t>() == 128);
    // 0.5/255 sits on a half step in byte units.
    CHECK(to_bytes(torch::full({3, 16, 16}, 0.5f / 255.0f))[0][0][0].item<uint8_t>() == 1);
}

TEST_CASE("round trip over every byte value is exact")
{
    // All 256 values laid out on a 16x16 grid; the channels carry shifted
    // copies so each channel sees every value.
    auto bytes = torch::arange(256, torch::kInt64).view({16, 16});
    auto img = torch::stack({bytes, (bytes + 85) % 256, (bytes + 170) % 256}).to(torch::kFloat32) / 255.0f;
    save_png(ImageTensor(img, Range::unit), scratch("all.png"));
    auto back = load_png(scratch("all.png"));
    CHECK(torch::equal(back.data(), img));
    CHECK(torch::equal(back.data(), quantize(ImageTensor(img, Range::unit)).data()));
}

TEST_CASE("random quantized image round-trips bitwise")
{
    torch::manual_seed(3);
    auto q = quantize(ImageTensor(torch::rand({3, 32, 48}), Range::unit));
    save_png(q, scratch("rand.png"));
    CHECK(torch::equal(load_png(scratch("rand.png")).data(), q.data()));
}

TEST_CASE("model range affine map")
{
    auto t = torch::tensor({0.0f, 1.0f, 0.25f}).view({3, 1, 1}).expand({3, 16, 16}).contiguous();
    auto m = to_model_range(ImageTensor(t, Range::unit));
    CHECK(m.range() == Range::model);
    CHECK(m.data()[0][0][0].item<float>() == -1.0f);
    CHECK(m.data()[1][0][0].item<float>() == 1.0f);
    CHECK(m.data()[2][0][0].item<float>() == -0.5f);
    auto back = from_model_range(m);
    CHECK(std::abs(back.data()[2][0][0].item<float>() - 0.25f) < 1e-7);

    torch::manual_seed(1);
    auto r = torch::rand({3, 16, 32});
    CHECK((from_model_range(to_model_range(ImageTensor(r, Range::unit))).data() - r).abs().max().item<float>() < 1e-6);
    CHECK_THROWS_AS(to_model_range(m), RangeError);
    CHECK_THROWS_AS(from_model_range(ImageTensor(t, Range::unit)), RangeError);
}

TEST_CASE("image invariants are enforced")
{
    CHECK_THROWS_AS(ImageTensor(torch::zeros({3, 20, 16}), Range::unit), DimensionError);
    CHECK_THROWS_AS(ImageTensor(torch::zeros({1, 16, 16}), Range::unit), DimensionError);
    CHECK_THROWS_AS(ImageTensor(torch::full({3, 16, 16}, 1.5f), Range::unit), RangeError);
    CHECK_THROWS_AS(ImageTensor(torch::full({3, 16, 16}, -0.5f), Range::unit), RangeError);
    CHECK_NOTHROW(ImageTensor(torch::full({3, 16, 16}, -0.5f), Range::model));
    CHECK_THROWS_AS(FeatureMap(torch::full({2, 4, 4}, NAN)), std::invalid_argument);
}

TEST_CASE("load_png rejects bad files and names the axis")
{
    CHECK_THROWS_AS(load_png(scratch("missing.png")), IoError);
    {
        std::ofstream f(scratch("junk.png"));
        f << "not a png";
    }
    CHECK_THROWS_AS(load_png(scratch("junk.png")), IoError);

    write_raw_png(scratch("wide.png"), 16, 24, PNG_FORMAT_RGB);
    try {
        load_png(scratch("wide.png"));
        FAIL("16x24 image accepted");
    } catch (const DimensionError &e) {
        CHECK(std::string(e.what()).find("width = 24") != std::string::npos);
    }
    write_raw_png(scratch("tall.png"), 40, 16, PNG_FORMAT_RGB);
    try {
        load_png(scratch("tall.png"));
        FAIL("40x16 image accepted");
    } catch (const DimensionError &e) {
        CHECK(std::string(e.what()).find("height = 40") != std::string::npos);
    }
    write_raw_png(scratch("gray.png"), 16, 16, PNG_FORMAT_GRAY);
    CHECK_THROWS_AS(load_png(scratch("gray.png")), IoError);
    write_raw_png(scratch("rgba.png"), 16, 16, PNG_FORMAT_RGBA);
    CHECK_THROWS_AS(load_png(scratch("rgba.png")), IoError);
    write_raw_png(scratch("rgb16.png"), 16, 16, PNG_FORMAT_LINEAR_RGB);
    CHECK_THROWS_AS(load_png(scratch("rgb16.png")), IoError);
}

TEST_CASE("light settings")
{
    const LightSetting e(Direction::E, 4500);
    CHECK(e.stem() == "E_4500");
    CHECK(LightSetting::parse("NW_2500") == LightSetting(Direction::NW, 2500));
    CHECK(default_target() == e);
    const auto grid = light_grid();
    CHECK(grid.size() == 40);
    CHECK(grid.front() == LightSetting(Direction::N, 2500));
    CHECK_THROWS(LightSetting::parse("E_4000"));
    CHECK_THROWS(LightSetting::parse("Q_4500"));
}
