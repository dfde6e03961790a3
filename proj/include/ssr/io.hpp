#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "ssr/clutter.hpp"
#include "ssr/grid.hpp"
#include "ssr/image.hpp"

namespace ssr::io {

/// "SSRF", u32 height, u32 width, then height*width f32, all little-endian.
std::vector<unsigned char> encode_ssrf(const Grid<float>& raster);
Grid<float> decode_ssrf(const std::vector<unsigned char>& bytes);

Grid<float> read_ssrf(const std::filesystem::path& path);
void write_ssrf(const std::filesystem::path& path, const Grid<float>& raster);

/// Intensities stored as round(v * 65535) in a 16-bit grayscale PNG.
void write_png16(const std::filesystem::path& path, const IntensityImage& image);
/// Any 8- or 16-bit single-channel PNG, scaled by its maximum code value.
Grid<float> read_png_gray(const std::filesystem::path& path);

/// 8-bit mask PNG: 0 clutter, 128 shadow, 255 target.
RegionMasks read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const RegionMasks& masks);

enum class ImageFormat { Ssrf, Png16 };
ImageFormat parse_format(const std::string& name);
const char* extension(ImageFormat format) noexcept;

/// Dispatches on extension (.ssrf or .png). Values are not range-checked.
Grid<float> read_raster(const std::filesystem::path& path);
IntensityImage read_intensity(const std::filesystem::path& path);
void write_intensity(const std::filesystem::path& path, const IntensityImage& image, ImageFormat format);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::vector<unsigned char> read_file(const std::filesystem::path& path);

Grid<float> to_f32(const Raster& raster);
Raster to_f64(const Grid<float>& raster);

} // namespace ssr::io
