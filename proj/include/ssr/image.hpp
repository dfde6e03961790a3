#pragma once

#include <span>
#include <vector>

#include "ssr/grid.hpp"

namespace ssr {

/// Linear-scale, non-negative amplitude samples.
class AmplitudeImage {
public:
    /// Throws InvalidImage on empty grids and on negative or non-finite samples.
    explicit AmplitudeImage(Raster raster);
    AmplitudeImage(std::size_t height, std::size_t width, std::vector<double> values)
        : AmplitudeImage(Raster(height, width, std::move(values))) {}

    const Raster& raster() const noexcept { return raster_; }
    std::size_t height() const noexcept { return raster_.height(); }
    std::size_t width() const noexcept { return raster_.width(); }
    std::size_t size() const noexcept { return raster_.size(); }
    std::span<const double> values() const noexcept { return raster_.values(); }

    friend bool operator==(const AmplitudeImage&, const AmplitudeImage&) = default;

private:
    Raster raster_;
};

/// Unit-interval intensities. Every pipeline stage consumes and emits these.
class IntensityImage {
public:
    /// Throws InvalidImage on empty grids and on values outside [0, 1].
    explicit IntensityImage(Raster raster);
    IntensityImage(std::size_t height, std::size_t width, std::vector<double> values)
        : IntensityImage(Raster(height, width, std::move(values))) {}

    /// Clips every value into [0, 1]; only non-finite values are rejected.
    static IntensityImage clipped(Raster raster);

    /// Builds an image from a caller-owned buffer (e.g. a dataloader array).
    static IntensityImage from_buffer(std::size_t height, std::size_t width, std::span<const float> data);
    static IntensityImage from_buffer(std::size_t height, std::size_t width, std::span<const double> data);

    const Raster& raster() const noexcept { return raster_; }
    std::size_t height() const noexcept { return raster_.height(); }
    std::size_t width() const noexcept { return raster_.width(); }
    std::size_t size() const noexcept { return raster_.size(); }
    std::span<const double> values() const noexcept { return raster_.values(); }
    double operator[](std::size_t i) const { return raster_[i]; }
    double operator()(std::size_t row, std::size_t col) const { return raster_(row, col); }

    /// Values rounded to 32-bit floats, the file-interchange precision.
    std::vector<float> to_f32() const;

    friend bool operator==(const IntensityImage&, const IntensityImage&) = default;

private:
    Raster raster_;
};

/// Affine rescale to [0, 1]. Throws DegenerateImage on constant input.
AmplitudeImage min_max_normalize(const AmplitudeImage& amplitude);

/// Dynamic-range compression I = log10(1 + cA) / log10(1 + c).
/// Expects amplitudes already in [0, 1]; throws InvalidConfig for c <= 0
/// and InvalidImage for amplitudes above 1.
IntensityImage log_map(const AmplitudeImage& amplitude, double c);

} // namespace ssr
