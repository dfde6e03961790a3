#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "ssr/config.hpp"
#include "ssr/gmm.hpp"
#include "ssr/image.hpp"
#include "ssr/rng.hpp"

namespace ssr {

/// Multiplicative change rates applied to both clutter kernels.
struct KernelDeltas {
    double delta_mu = 0.0;
    double delta_sigma = 0.0;

    friend bool operator==(const KernelDeltas&, const KernelDeltas&) = default;
};

/// Adds i.i.d. N(0, sigma_s^2) to every pixel. The result is not clipped.
Raster add_noise(const IntensityImage& image, double sigma_s, Rng& rng);

/// delta_mu ~ U(-alpha, alpha), delta_sigma ~ U(-beta, beta).
KernelDeltas draw_deltas(double alpha, double beta, Rng& rng);

/// Scales mean and std of both clutter kernels by (1 + delta); the target
/// kernel and all mixing weights pass through untouched.
GmmParams adjust_kernels(const GmmParams& params, const KernelDeltas& deltas, double sigma_floor = 0.0);

/// height x width i.i.d. draws from the mixture, each clipped to [0, 1].
IntensityImage sample_mixture(const GmmParams& params, std::size_t height, std::size_t width, Rng& rng);

/// Rank-based histogram specification: the output keeps the spatial ordering
/// of `source` and takes its values from `reference`. Source ties resolve by
/// row-major index. Throws ShapeMismatch when pixel counts differ.
IntensityImage histogram_match(const Raster& source, const Raster& reference);
inline IntensityImage histogram_match(const IntensityImage& source, const IntensityImage& reference) {
    return histogram_match(source.raster(), reference.raster());
}

struct AugmentTrace {
    KernelDeltas deltas;
    GmmParams adjusted;
};

/// One soft segmented randomization pass: noise, kernel perturbation,
/// mixture sampling, and histogram matching of the noised image onto the
/// sampled values. `params` must come from the noise-free image.
IntensityImage ssr_augment(const IntensityImage& image, const GmmParams& params, const SsrConfig& cfg, Rng& rng,
                           AugmentTrace* trace = nullptr);

/// Same pipeline with caller-pinned deltas (no delta draw).
IntensityImage ssr_augment_with_deltas(const IntensityImage& image, const GmmParams& params, const SsrConfig& cfg,
                                       const KernelDeltas& deltas, Rng& rng);

/// Replay record for one augmented image.
struct AugmentRecord {
    std::uint64_t base_seed = 0;
    std::uint64_t image_index = 0;
    std::uint64_t replica = 0;
    bool applied = false;
    KernelDeltas deltas;
    double sigma_s = 0.0;
    GmmParams gmm;
};

nlohmann::json to_json(const AugmentRecord& record);

/// Seed of the stream that produces replica `replica` of image `image_index`.
constexpr std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t image_index, std::uint64_t replica) noexcept {
    return derive_seed(derive_seed(base_seed, image_index), replica);
}

/// Augments one image on its own stream. The stream first decides application
/// (probability cfg.apply_probability) and then drives the pipeline.
IntensityImage augment_one(const IntensityImage& image, const GmmParams& params, const SsrConfig& cfg,
                           std::uint64_t base_seed, std::uint64_t image_index, std::uint64_t replica = 0,
                           AugmentRecord* record = nullptr);


/// Per-image streams come from (base_seed, position), so results never depend
/// on thread count. `jobs` <= 1 runs serially.
std::vector<IntensityImage> augment_batch(const std::vector<IntensityImage>& images,
                                          const std::vector<GmmParams>& params, const SsrConfig& cfg,
                                          std::uint64_t base_seed, std::vector<AugmentRecord>* records = nullptr,
                                          unsigned jobs = 1);

/// Fits each image and augments it.
std::vector<IntensityImage> augment_batch(const std::vector<IntensityImage>& images, const SsrConfig& cfg,
                                          std::uint64_t base_seed, std::vector<AugmentRecord>* records = nullptr,
                                          unsigned jobs = 1);

} // namespace ssr
