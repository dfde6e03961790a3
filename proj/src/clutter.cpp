#include "ssr/clutter.hpp"

#include <algorithm>
#include <cmath>

#include "ssr/gmm.hpp"
#include "ssr/histogram.hpp"
#include "ssr/randomizer.hpp"

namespace ssr {

namespace {

using BinaryGrid = Grid<unsigned char>;

/// Square max filter (dilation) or min filter (erosion), done separably.
/// Erosion treats pixels outside the image as set, so closing never shrinks
/// regions that touch the border.
BinaryGrid morph(const BinaryGrid& in, std::size_t radius, bool dilate) {
    const std::size_t h = in.height(), w = in.width();
    const unsigned char outside = dilate ? 0 : 1;
    auto pass = [&](const BinaryGrid& src, bool along_rows) {
        BinaryGrid dst(h, w);
        for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t c = 0; c < w; ++c) {
                unsigned char acc = dilate ? 0 : 1;
                for (std::ptrdiff_t o = -static_cast<std::ptrdiff_t>(radius);
                     o <= static_cast<std::ptrdiff_t>(radius); ++o) {
                    const std::ptrdiff_t rr = static_cast<std::ptrdiff_t>(r) + (along_rows ? 0 : o);
                    const std::ptrdiff_t cc = static_cast<std::ptrdiff_t>(c) + (along_rows ? o : 0);
                    unsigned char v = outside;
                    if (rr >= 0 && cc >= 0 && rr < static_cast<std::ptrdiff_t>(h) && cc < static_cast<std::ptrdiff_t>(w)) {
                        v = src(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
                    }
                    acc = dilate ? std::max(acc, v) : std::min(acc, v);
                }
                dst(r, c) = acc;
            }
        }
        return dst;
    };
    return pass(pass(in, true), false);
}

BinaryGrid closing(const BinaryGrid& in, std::size_t radius) {
    if (radius == 0) return in;
    return morph(morph(in, radius, true), radius, false);
}

void require_same_shape(const IntensityImage& image, const RegionMasks& masks) {
    if (image.height() != masks.height() || image.width() != masks.width()) {
        throw Error(ErrorKind::ShapeMismatch, "masks do not match image shape");
    }
}

void require_same_shape(const IntensityImage& a, const IntensityImage& b) {
    if (!a.raster().same_shape(b.raster())) throw Error(ErrorKind::ShapeMismatch, "image shapes differ");
}

double draw_delta_mu(double alpha, Rng& rng) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidConfig, "alpha must lie in [0, 1)");
    return rng.uniform(-alpha, alpha);
}

} // namespace

RegionMasks::RegionMasks(std::size_t height, std::size_t width, Region fill) : labels_(height, width, fill) {}

std::size_t RegionMasks::count(Region region) const noexcept {
    return static_cast<std::size_t>(std::count(labels_.values().begin(), labels_.values().end(), region));
}

Mask RegionMasks::mask(Region region) const {
    Mask out(height(), width());
    for (std::size_t i = 0; i < size(); ++i) out[i] = labels_[i] == region ? 1 : 0;
    return out;
}

std::uint8_t region_label_value(Region region) noexcept {
    switch (region) {
        case Region::Clutter: return 0;
        case Region::Shadow: return 128;
        case Region::Target: return 255;
    }
    return 0;
}

Region region_from_label_value(std::uint8_t value) {
    switch (value) {
        case 0: return Region::Clutter;
        case 128: return Region::Shadow;
        case 255: return Region::Target;
        default: throw Error(ErrorKind::Format, "mask label " + std::to_string(value) + " is not 0, 128 or 255");
    }
}

RegionMasks baseline_segment(const IntensityImage& image, const SsrConfig& cfg, const SegmentThresholds& thresholds) {
    const auto values = image.values();
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    RegionMasks masks(image.height(), image.width());
    if (*lo == *hi) return masks;

    GmmParams params;
    try {
        params = fit_gmm(compute_histogram(image, cfg.bin_count), cfg);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::DegenerateHistogram) throw Error(ErrorKind::DegenerateImage, e.what());
        throw;
    }

    BinaryGrid target(image.height(), image.width());
    for (std::size_t i = 0; i < values.size(); ++i) {
        target[i] = posterior(values[i], params).gamma[GmmParams::kTarget] >= thresholds.target_posterior ? 1 : 0;
    }

    std::vector<double> sorted(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(thresholds.shadow_quantile * static_cast<double>(sorted.size() - 1));
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank), sorted.end());
    const double shadow_level = sorted[rank];
    BinaryGrid shadow(image.height(), image.width());
    for (std::size_t i = 0; i < values.size(); ++i) shadow[i] = values[i] < shadow_level ? 1 : 0;

    target = closing(target, thresholds.closing_radius);
    shadow = closing(shadow, thresholds.closing_radius);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (target[i]) masks[i] = Region::Target;
        else if (shadow[i]) masks[i] = Region::Shadow;
    }
    return masks;
}

ClutterOffset clutter_region_means(const IntensityImage& image, const IntensityImage& clutter,
                                   const RegionMasks& masks) {
    require_same_shape(image, masks);
    require_same_shape(image, clutter);
    double clutter_sum = 0.0, image_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < image.size(); ++i) {
        if (!masks.is(i, Region::Clutter)) continue;
        clutter_sum += clutter[i];
        image_sum += image[i];
        ++count;
    }
    if (count == 0) throw Error(ErrorKind::EmptyRegion, "clutter mask is empty");
    ClutterOffset out;
    out.clutter_mean = clutter_sum / static_cast<double>(count);
    out.image_mean = image_sum / static_cast<double>(count);
    out.d = out.clutter_mean - out.image_mean;
    return out;
}

IntensityImage merge_clutter(const IntensityImage& image, const RegionMasks& masks, const IntensityImage& clutter) {
    const ClutterOffset offset = clutter_region_means(image, clutter, masks);
    Raster out(image.height(), image.width());
    for (std::size_t i = 0; i < image.size(); ++i) {
        switch (masks[i]) {
            case Region::Target: out[i] = std::clamp(image[i] + offset.d, 0.0, 1.0); break;
            case Region::Shadow: out[i] = image[i]; break;
            case Region::Clutter: out[i] = clutter[i]; break;
        }
    }
    return IntensityImage(std::move(out));
}

ClutterCrop random_clutter_crop(const IntensityImage& scene, std::size_t height, std::size_t width,
                                const RegionMasks* exclusion, Rng& rng, int max_attempts) {
    if (height == 0 || width == 0) throw Error(ErrorKind::InvalidConfig, "crop size must be positive");
    if (scene.height() < height || scene.width() < width) {
        throw Error(ErrorKind::ShapeMismatch, "clutter scene smaller than requested crop");
    }
    if (exclusion) require_same_shape(scene, *exclusion);

    // Summed-area table of shadow pixels for O(1) window checks.
    const std::size_t H = scene.height(), W = scene.width();
    std::vector<std::size_t> integral;
    if (exclusion) {
        integral.assign((H + 1) * (W + 1), 0);
        for (std::size_t r = 0; r < H; ++r) {
            std::size_t row = 0;
            for (std::size_t c = 0; c < W; ++c) {
                row += exclusion->is(r * W + c, Region::Shadow) ? 1 : 0;
                integral[(r + 1) * (W + 1) + c + 1] = integral[r * (W + 1) + c + 1] + row;
            }
        }
    }
    auto shadow_in = [&](std::size_t r0, std::size_t c0) {
        const std::size_t r1 = r0 + height, c1 = c0 + width;
        return integral[r1 * (W + 1) + c1] + integral[r0 * (W + 1) + c0] - integral[r0 * (W + 1) + c1] -
               integral[r1 * (W + 1) + c0];
    };

    for (int attempt = 1; attempt <= std::max(1, max_attempts); ++attempt) {
        const std::size_t row = rng.below(H - height + 1);
        const std::size_t col = rng.below(W - width + 1);
        if (exclusion && shadow_in(row, col) != 0) continue;
        Raster patch(height, width);
        for (std::size_t r = 0; r < height; ++r) {
            for (std::size_t c = 0; c < width; ++c) patch(r, c) = scene(row + r, col + c);
        }
        return {IntensityImage(std::move(patch)), {row, col}, attempt};
    }
    throw Error(ErrorKind::NoValidCrop, "no shadow-free crop found in " + std::to_string(max_attempts) + " attempts");
}

IntensityImage hard_seg_variant1(const IntensityImage& image, const RegionMasks& masks, const SsrConfig& cfg,
                                 Rng& rng, double* delta_mu_out) {
    require_same_shape(image, masks);
    cfg.validate();
    Raster out = add_noise(image, cfg.sigma_s, rng);
    const double delta_mu = draw_delta_mu(cfg.alpha, rng);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (masks.is(i, Region::Clutter)) out[i] *= 1.0 + delta_mu;
    }
    if (delta_mu_out) *delta_mu_out = delta_mu;
    return IntensityImage::clipped(std::move(out));
}

IntensityImage hard_seg_variant2(const IntensityImage& image, const RegionMasks& masks, const SsrConfig& cfg,
                                 Rng& rng, double* delta_mu_out) {
    require_same_shape(image, masks);
    cfg.validate();
    const Raster noised = add_noise(image, cfg.sigma_s, rng);
    const double delta_mu = draw_delta_mu(cfg.alpha, rng);
    Raster out = image.raster();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!masks.is(i, Region::Target)) out[i] = noised[i] * (1.0 + delta_mu);
    }
    if (delta_mu_out) *delta_mu_out = delta_mu;
    return IntensityImage::clipped(std::move(out));
}

} // namespace ssr
