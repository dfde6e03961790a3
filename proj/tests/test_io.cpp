#include <doctest.h>

#include <cmath>
#include <fstream>
#include <functional>

#include "ssr/config.hpp"
#include "ssr/io.hpp"
#include "test_support.hpp"

using namespace ssr;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no exception");
    return ErrorKind::Io;
}

} // namespace

TEST_CASE("ssrf round trip") {
    Grid<float> g(3, 5);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = 0.1f * static_cast<float>(i);
    const auto bytes = io::encode_ssrf(g);
    CHECK(bytes.size() == 12 + 4 * 15);
    CHECK(bytes[0] == 'S');
    CHECK(bytes[4] == 3);
    CHECK(bytes[8] == 5);
    CHECK(io::decode_ssrf(bytes) == g);

    const auto dir = ssr::testing::scratch_dir("io_ssrf");
    io::write_ssrf(dir / "a.ssrf", g);
    CHECK(io::read_ssrf(dir / "a.ssrf") == g);
    CHECK(io::read_raster(dir / "a.ssrf") == g);
}

TEST_CASE("ssrf rejects malformed files") {
    Grid<float> g(2, 2, 0.5f);
    auto bytes = io::encode_ssrf(g);
    auto short_bytes = bytes;
    short_bytes.pop_back();
    CHECK(kind_of([&] { io::decode_ssrf(short_bytes); }) == ErrorKind::Format);
    auto long_bytes = bytes;
    long_bytes.push_back(0);
    CHECK(kind_of([&] { io::decode_ssrf(long_bytes); }) == ErrorKind::Format);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK(kind_of([&] { io::decode_ssrf(bad_magic); }) == ErrorKind::Format);
    CHECK(kind_of([&] { io::decode_ssrf({'S', 'S'}); }) == ErrorKind::Format);
    CHECK(kind_of([&] { io::read_ssrf("/nonexistent/x.ssrf"); }) == ErrorKind::Io);
}

TEST_CASE("png16 round trip quantizes to 16 bits") {
    const auto dir = ssr::testing::scratch_dir("io_png");
    std::vector<double> v(6 * 7);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i) / static_cast<double>(v.size() - 1);
    v[3] = 0.123456789;
    const IntensityImage img(6, 7, v);
    io::write_png16(dir / "a.png", img);
    const Grid<float> back = io::read_png_gray(dir / "a.png");
    REQUIRE(back.height() == 6);
    REQUIRE(back.width() == 7);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double code = std::round(v[i] * 65535.0);
        REQUIRE(back[i] == static_cast<float>(code / 65535.0));
    }
    const IntensityImage read = io::read_intensity(dir / "a.png");
    CHECK(std::abs(read[3] - 0.123456789) <= 0.5 / 65535.0 + 1e-7);
}

TEST_CASE("write_intensity dispatches on format") {
    const auto dir = ssr::testing::scratch_dir("io_fmt");
    const IntensityImage img(2, 2, std::vector<double>{0.0, 0.25, 0.5, 1.0});
    io::write_intensity(dir / "x.ssrf", img, io::ImageFormat::Ssrf);
    CHECK(io::read_intensity(dir / "x.ssrf") == img);
    CHECK(io::parse_format("png16") == io::ImageFormat::Png16);
    CHECK(std::string(io::extension(io::ImageFormat::Png16)) == ".png");
    CHECK(kind_of([] { io::parse_format("tiff"); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("mask png round trip and validation") {
    const auto dir = ssr::testing::scratch_dir("io_mask");
    RegionMasks m(3, 4);
    m[1] = Region::Shadow;
    m[5] = Region::Target;
    m[11] = Region::Target;
    io::write_mask_png(dir / "m.png", m);
    CHECK(io::read_mask_png(dir / "m.png") == m);

    // A 16-bit image is not a valid mask.
    io::write_png16(dir / "bad.png", IntensityImage(2, 2, std::vector<double>(4, 0.5)));
    CHECK_THROWS_AS(io::read_mask_png(dir / "bad.png"), Error);
}

TEST_CASE("atomic writes leave no temporaries") {
    const auto dir = ssr::testing::scratch_dir("io_atomic");
    io::write_text_atomic(dir / "t.txt", "hello");
    io::write_text_atomic(dir / "t.txt", "world");
    const auto bytes = io::read_file(dir / "t.txt");
    CHECK(std::string(bytes.begin(), bytes.end()) == "world");
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
    CHECK(entries == 1);
}

TEST_CASE("config json") {
    const SsrConfig def;
    CHECK(def.c == 1000.0);
    CHECK(def.sigma_s == 0.3);
    CHECK(def.alpha == 0.6);
    CHECK(def.beta == 0.4);
    CHECK(def.bin_count == 256);
    CHECK(def.apply_probability == 0.5);
    CHECK(config_preset("measured").sigma_s == 0.2);

    SsrConfig custom;
    custom.alpha = 0.25;
    custom.em_restarts = 3;
    CHECK(config_from_json(to_json(custom)).alpha == 0.25);
    CHECK(config_from_json(to_json(custom)).em_restarts == 3);

    CHECK(config_from_json(nlohmann::json{{"preset", "measured"}, {"beta", 0.1}}).sigma_s == 0.2);
    CHECK(kind_of([] { config_from_json(nlohmann::json{{"alpah", 0.1}}); }) == ErrorKind::InvalidConfig);
    CHECK(kind_of([] { config_from_json(nlohmann::json{{"alpha", -0.1}}); }) == ErrorKind::InvalidConfig);
    CHECK(kind_of([] { config_from_json(nlohmann::json{{"apply_probability", 1.5}}); }) == ErrorKind::InvalidConfig);
    CHECK(kind_of([] { config_preset("nope"); }) == ErrorKind::InvalidConfig);

    const auto dir = ssr::testing::scratch_dir("io_config");
    std::ofstream(dir / "c.json") << R"({"sigma_s": 0.15})";
    CHECK(load_config((dir / "c.json").string()).sigma_s == 0.15);
}
