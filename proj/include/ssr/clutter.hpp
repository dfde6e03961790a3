#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "ssr/config.hpp"
#include "ssr/grid.hpp"
#include "ssr/image.hpp"
#include "ssr/rng.hpp"

namespace ssr {

enum class Region : unsigned char { Clutter = 0, Shadow = 1, Target = 2 };

/// Exhaustive target/shadow/clutter partition stored as one label per pixel,
/// which makes overlap unrepresentable.
class RegionMasks {
public:
    RegionMasks(std::size_t height, std::size_t width, Region fill = Region::Clutter);
    explicit RegionMasks(Grid<Region> labels) : labels_(std::move(labels)) {}

    std::size_t height() const noexcept { return labels_.height(); }
    std::size_t width() const noexcept { return labels_.width(); }
    std::size_t size() const noexcept { return labels_.size(); }
    Region operator[](std::size_t i) const { return labels_[i]; }
    Region& operator[](std::size_t i) { return labels_[i]; }
    const Grid<Region>& labels() const noexcept { return labels_; }

    bool is(std::size_t i, Region region) const { return labels_[i] == region; }
    std::size_t count(Region region) const noexcept;
    /// Boolean view of one region (1 = member).
    Mask mask(Region region) const;

    friend bool operator==(const RegionMasks&, const RegionMasks&) = default;

private:
    Grid<Region> labels_;
};

/// Pixel-label encoding used by mask PNG files.
std::uint8_t region_label_value(Region region) noexcept;
/// Throws Format for any value other than 0, 128, 255.
Region region_from_label_value(std::uint8_t value);

struct SegmentThresholds {
    double target_posterior = 0.5;
    double shadow_quantile = 0.05;
    /// Half-width of the square structuring element used for closing.
    std::size_t closing_radius = 1;
};

/// Stand-in segmenter: target = closed {gamma_T >= 0.5}, shadow = closed
/// {I < low quantile} outside target, clutter = everything else. Constant
/// images come back as all clutter. Not a faithful SAR segmenter.
RegionMasks baseline_segment(const IntensityImage& image, const SsrConfig& cfg, const SegmentThresholds& thresholds = {});

struct ClutterOffset {
    double clutter_mean = 0.0;   // mean of the clutter patch over M_clutter
    double image_mean = 0.0;     // mean of the measured image over M_clutter
    double d = 0.0;              // clutter_mean - image_mean
};

/// Throws ShapeMismatch or EmptyRegion (no clutter pixels).
ClutterOffset clutter_region_means(const IntensityImage& image, const IntensityImage& clutter,
                                   const RegionMasks& masks);

/// target: clip(I + d); shadow: I; clutter: C.
IntensityImage merge_clutter(const IntensityImage& image, const RegionMasks& masks, const IntensityImage& clutter);

struct CropWindow {
    std::size_t row = 0;
    std::size_t col = 0;
};

struct ClutterCrop {
    IntensityImage patch;
    CropWindow window;
    int attempts = 0;
};

/// Uniformly placed height x width window. With `exclusion`, windows touching
/// any shadow-labelled scene pixel are redrawn, at most `max_attempts` times
/// (NoValidCrop afterwards).
ClutterCrop random_clutter_crop(const IntensityImage& scene, std::size_t height, std::size_t width,
                                const RegionMasks* exclusion, Rng& rng, int max_attempts = 1000);

/// Noise everywhere, then clutter pixels scaled by (1 + delta_mu), then clip.
IntensityImage hard_seg_variant1(const IntensityImage& image, const RegionMasks& masks, const SsrConfig& cfg,
                                 Rng& rng, double* delta_mu_out = nullptr);

/// Noise and (1 + delta_mu) scaling on non-target pixels only (clutter and
/// shadow); target pixels pass through unchanged.
IntensityImage hard_seg_variant2(const IntensityImage& image, const RegionMasks& masks, const SsrConfig& cfg,
                                 Rng& rng, double* delta_mu_out = nullptr);

} // namespace ssr
