#include "ssr/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <png.h>

namespace ssr::io {

namespace fs = std::filesystem;

namespace {

constexpr std::array<unsigned char, 4> kMagic{'S', 'S', 'R', 'F'};
constexpr std::size_t kHeaderBytes = 12;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<unsigned char>(v >> shift));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

// ---------------------------------------------------------------------------
// libpng glue. Errors longjmp back into the encode/decode frame; only trivially
// destructible locals live between setjmp and the libpng calls.

struct ReadCursor {
    const std::vector<unsigned char>* bytes;
    std::size_t offset;
};

void png_read_callback(png_structp png, png_bytep out, png_size_t length) {
    auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cursor->offset + length > cursor->bytes->size()) png_error(png, "truncated PNG stream");
    std::memcpy(out, cursor->bytes->data() + cursor->offset, length);
    cursor->offset += length;
}

void png_write_callback(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void png_flush_callback(png_structp) {}

void png_warning_callback(png_structp, png_const_charp) {}

struct DecodedGray {
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    int bit_depth = 0;
    std::vector<std::uint16_t> samples;
};

bool decode_png_gray(const std::vector<unsigned char>& bytes, DecodedGray& out, char (&error)[256]) {
    error[0] = '\0';
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        std::snprintf(error, sizeof error, "not a PNG file");
        return false;
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_callback);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::snprintf(error, sizeof error, "libpng initialization failed");
        return false;
    }
    ReadCursor cursor{&bytes, 0};
    std::vector<png_bytep> rows;
    std::vector<unsigned char> pixels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::snprintf(error, sizeof error, "corrupt PNG data");
        return false;
    }
    png_set_read_fn(png, &cursor, png_read_callback);
    png_read_info(png, info);
    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int color_type = png_get_color_type(png, info);
    int bit_depth = png_get_bit_depth(png, info);
    if (color_type != PNG_COLOR_TYPE_GRAY) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::snprintf(error, sizeof error, "PNG must be single-channel grayscale");
        return false;
    }
    if (bit_depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
        bit_depth = 8;
    }
    png_read_update_info(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    pixels.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 r = 0; r < height; ++r) rows[r] = pixels.data() + r * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    out.height = height;
    out.width = width;
    out.bit_depth = bit_depth;
    out.samples.resize(static_cast<std::size_t>(height) * width);
    for (std::size_t r = 0; r < height; ++r) {
        const unsigned char* row = pixels.data() + r * stride;
        for (std::size_t c = 0; c < width; ++c) {
            out.samples[r * width + c] = bit_depth == 16
                ? static_cast<std::uint16_t>(row[2 * c] << 8 | row[2 * c + 1])
                : row[c];
        }
    }
    return true;
}

bool encode_png_gray(std::uint32_t height, std::uint32_t width, int bit_depth, const std::vector<unsigned char>& raw,
                     std::vector<unsigned char>& out) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_callback);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    std::vector<png_bytep> rows(height);
    const std::size_t stride = static_cast<std::size_t>(width) * (bit_depth == 16 ? 2 : 1);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, &out, png_write_callback, png_flush_callback);
    png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::uint32_t r = 0; r < height; ++r) rows[r] = const_cast<png_bytep>(raw.data() + r * stride);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

std::vector<unsigned char> encode_png_or_throw(std::uint32_t height, std::uint32_t width, int bit_depth,
                                               const std::vector<unsigned char>& raw) {
    std::vector<unsigned char> out;
    if (!encode_png_gray(height, width, bit_depth, raw, out)) throw Error(ErrorKind::Io, "PNG encoding failed");
    return out;
}

std::uint32_t checked_u32(std::size_t v) {
    if (v > 0xffffffffULL) throw Error(ErrorKind::Format, "dimension exceeds 32 bits");
    return static_cast<std::uint32_t>(v);
}

std::string lower_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return ext;
}

} // namespace

std::vector<unsigned char> encode_ssrf(const Grid<float>& raster) {
    std::vector<unsigned char> out(kMagic.begin(), kMagic.end());
    out.reserve(kHeaderBytes + 4 * raster.size());
    put_u32(out, checked_u32(raster.height()));
    put_u32(out, checked_u32(raster.width()));
    for (float v : raster.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

Grid<float> decode_ssrf(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < kHeaderBytes || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw Error(ErrorKind::Format, "missing SSRF header");
    }
    const std::uint64_t height = get_u32(bytes.data() + 4);
    const std::uint64_t width = get_u32(bytes.data() + 8);
    const std::uint64_t expected = kHeaderBytes + 4 * height * width;
    if (bytes.size() != expected) {
        throw Error(ErrorKind::Format, "SSRF length " + std::to_string(bytes.size()) + " disagrees with header (" +
                                           std::to_string(expected) + " expected)");
    }
    std::vector<float> values(height * width);
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = std::bit_cast<float>(get_u32(bytes.data() + kHeaderBytes + 4 * i));
    }
    return Grid<float>(height, width, std::move(values));
}

std::vector<unsigned char> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const fs::path& path, const std::vector<unsigned char>& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot rename into " + path.string() + ": " + ec.message());
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    write_file_atomic(path, std::vector<unsigned char>(text.begin(), text.end()));
}

Grid<float> read_ssrf(const fs::path& path) {
    try {
        return decode_ssrf(read_file(path));
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

void write_ssrf(const fs::path& path, const Grid<float>& raster) { write_file_atomic(path, encode_ssrf(raster)); }

void write_png16(const fs::path& path, const IntensityImage& image) {
    std::vector<unsigned char> raw;
    raw.reserve(2 * image.size());
    for (double v : image.values()) {
        const auto code = static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
        raw.push_back(static_cast<unsigned char>(code >> 8));
        raw.push_back(static_cast<unsigned char>(code & 0xff));
    }
    write_file_atomic(path, encode_png_or_throw(checked_u32(image.height()), checked_u32(image.width()), 16, raw));
}

Grid<float> read_png_gray(const fs::path& path) {
    DecodedGray decoded;
    char error[256];
    if (!decode_png_gray(read_file(path), decoded, error)) throw Error(ErrorKind::Format, path.string() + ": " + error);
    const float scale = decoded.bit_depth == 16 ? 65535.0f : 255.0f;
    std::vector<float> values(decoded.samples.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>(decoded.samples[i]) / scale;
    return Grid<float>(decoded.height, decoded.width, std::move(values));
}

RegionMasks read_mask_png(const fs::path& path) {
    DecodedGray decoded;
    char error[256];
    if (!decode_png_gray(read_file(path), decoded, error)) throw Error(ErrorKind::Format, path.string() + ": " + error);
    if (decoded.bit_depth != 8) throw Error(ErrorKind::Format, path.string() + ": mask PNG must be 8-bit");
    Grid<Region> labels(decoded.height, decoded.width);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        try {
            labels[i] = region_from_label_value(static_cast<std::uint8_t>(decoded.samples[i]));
        } catch (const Error& e) {
            throw Error(ErrorKind::Format, path.string() + ": " + e.what());
        }
    }
    return RegionMasks(std::move(labels));
}

void write_mask_png(const fs::path& path, const RegionMasks& masks) {
    std::vector<unsigned char> raw(masks.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = region_label_value(masks[i]);
    write_file_atomic(path, encode_png_or_throw(checked_u32(masks.height()), checked_u32(masks.width()), 8, raw));
}

ImageFormat parse_format(const std::string& name) {
    if (name == "ssrf") return ImageFormat::Ssrf;
    if (name == "png16") return ImageFormat::Png16;
    throw Error(ErrorKind::InvalidConfig, "unknown format '" + name + "' (expected ssrf or png16)");
}

const char* extension(ImageFormat format) noexcept { return format == ImageFormat::Ssrf ? ".ssrf" : ".png"; }

Grid<float> read_raster(const fs::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".ssrf") return read_ssrf(path);
    if (ext == ".png") return read_png_gray(path);
    throw Error(ErrorKind::Format, path.string() + ": unsupported extension");
}

IntensityImage read_intensity(const fs::path& path) {
    try {
        return IntensityImage(to_f64(read_raster(path)));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidImage || e.kind() == ErrorKind::ShapeMismatch) {
            throw Error(e.kind(), path.string() + ": " + e.what());
        }
        throw;
    }
}

void write_intensity(const fs::path& path, const IntensityImage& image, ImageFormat format) {
    if (format == ImageFormat::Png16) {
        write_png16(path, image);
    } else {
        write_ssrf(path, to_f32(image.raster()));
    }
}

Grid<float> to_f32(const Raster& raster) {
    std::vector<float> values(raster.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>(raster[i]);
    return Grid<float>(raster.height(), raster.width(), std::move(values));
}

Raster to_f64(const Grid<float>& raster) {
    return Raster(raster.height(), raster.width(), std::vector<double>(raster.values().begin(), raster.values().end()));
}

} // namespace ssr::io
