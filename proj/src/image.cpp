#include "ssr/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ssr {

namespace {

void require_non_empty(const Raster& raster) {
    if (raster.empty()) throw Error(ErrorKind::InvalidImage, "image has no pixels");
}

template <typename T>
Raster raster_from(std::size_t height, std::size_t width, std::span<const T> data) {
    if (data.size() != height * width) {
        throw Error(ErrorKind::ShapeMismatch, "buffer length " + std::to_string(data.size()) +
                                                  " does not match " + std::to_string(height) + "x" +
                                                  std::to_string(width));
    }
    return Raster(height, width, std::vector<double>(data.begin(), data.end()));
}

} // namespace

AmplitudeImage::AmplitudeImage(Raster raster) : raster_(std::move(raster)) {
    require_non_empty(raster_);
    for (double v : raster_.values()) {
        if (!std::isfinite(v)) throw Error(ErrorKind::InvalidImage, "non-finite amplitude sample");
        if (v < 0.0) throw Error(ErrorKind::InvalidImage, "negative amplitude sample");
    }
}

IntensityImage::IntensityImage(Raster raster) : raster_(std::move(raster)) {
    require_non_empty(raster_);
    for (double v : raster_.values()) {
        if (!std::isfinite(v)) throw Error(ErrorKind::InvalidImage, "non-finite intensity");
        if (v < 0.0 || v > 1.0) throw Error(ErrorKind::InvalidImage, "intensity outside [0, 1]");
    }
}

IntensityImage IntensityImage::clipped(Raster raster) {
    for (double& v : raster.values()) {
        if (!std::isfinite(v)) throw Error(ErrorKind::InvalidImage, "non-finite intensity");
        v = std::clamp(v, 0.0, 1.0);
    }
    return IntensityImage(std::move(raster));
}

IntensityImage IntensityImage::from_buffer(std::size_t height, std::size_t width, std::span<const float> data) {
    return IntensityImage(raster_from(height, width, data));
}

IntensityImage IntensityImage::from_buffer(std::size_t height, std::size_t width, std::span<const double> data) {
    return IntensityImage(raster_from(height, width, data));
}

std::vector<float> IntensityImage::to_f32() const {
    std::vector<float> out(raster_.size());
    std::transform(raster_.values().begin(), raster_.values().end(), out.begin(),
                   [](double v) { return static_cast<float>(v); });
    return out;
}

AmplitudeImage min_max_normalize(const AmplitudeImage& amplitude) {
    const auto values = amplitude.values();
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    if (!(range > 0.0)) throw Error(ErrorKind::DegenerateImage, "constant image cannot be min-max normalized");
    Raster out(amplitude.height(), amplitude.width());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / range;
    return AmplitudeImage(std::move(out));
}

IntensityImage log_map(const AmplitudeImage& amplitude, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorKind::InvalidConfig, "log-mapping parameter c must be > 0");
    const double denom = std::log1p(c);
    Raster out(amplitude.height(), amplitude.width());
    const auto values = amplitude.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > 1.0) throw Error(ErrorKind::InvalidImage, "amplitude above 1; normalize first");
        out[i] = std::clamp(std::log1p(c * values[i]) / denom, 0.0, 1.0);
    }
    return IntensityImage(std::move(out));
}

} // namespace ssr
