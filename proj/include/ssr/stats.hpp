#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssr/clutter.hpp"
#include "ssr/config.hpp"
#include "ssr/gmm.hpp"
#include "ssr/histogram.hpp"
#include "ssr/image.hpp"

namespace ssr {

struct WeightedMoments {
    double mean = 0.0;
    double stddev = 0.0;
    double weight = 0.0;
};

/// Weighted mean and (population) std of `values`. Requires positive total weight.
WeightedMoments weighted_moments(std::span<const double> values, std::span<const double> weights);

struct ImageStats {
    double clutter_mean = 0.0;
    double clutter_std = 0.0;
    double global_mean = 0.0;
    double global_std = 0.0;
    /// Hard-mask clutter moments, present only when masks were supplied.
    std::optional<double> mask_clutter_mean;
    std::optional<double> mask_clutter_std;
};

/// Clutter moments weighted by gamma_C1 + gamma_C2 at each pixel. Throws
/// NoClutterMass when the summed weight is below 1% of the pixel count.
ImageStats image_stats(const IntensityImage& image, const GmmParams& params, const RegionMasks* masks = nullptr);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

struct BinnedHistogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::size_t> counts;
};

/// Equal-width histogram on [lo, hi]; values equal to hi land in the last bin.
BinnedHistogram bin_values(std::span<const double> values, double lo, double hi, std::size_t bins);

struct PopulationReport {
    static constexpr std::size_t kBins = 32;

    std::vector<ImageStats> stats_a;
    std::vector<ImageStats> stats_b;
    BinnedHistogram clutter_mean_a, clutter_mean_b;
    BinnedHistogram clutter_std_a, clutter_std_b;
    double ks_clutter_mean = 0.0;
    double ks_clutter_std = 0.0;
};

/// Throws EmptyPopulation if either side is empty. Both sides share the
/// histogram range spanned by the union of their values.
PopulationReport population_report(std::span<const ImageStats> stats_a, std::span<const ImageStats> stats_b);

nlohmann::json to_json(const PopulationReport& report);

/// Max minus min of the clutter means.
double clutter_mean_support_width(std::span<const ImageStats> stats);

struct SweepPoint {
    std::size_t kernel_count = 0;
    double nll = 0.0;
    int iterations = 0;
};

/// Converged NLL per kernel count. Each K > 1 fit also starts from the K - 1
/// solution plus a negligible new kernel and keeps the better result, so the
/// curve is non-increasing in K up to ~1e-7.
std::vector<SweepPoint> nll_kernel_sweep(const Histogram& hist, std::span<const std::size_t> kernel_counts,
                                         const SsrConfig& cfg);

} // namespace ssr
