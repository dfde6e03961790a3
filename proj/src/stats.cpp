#include "ssr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ssr {

WeightedMoments weighted_moments(std::span<const double> values, std::span<const double> weights) {
    if (values.size() != weights.size()) throw Error(ErrorKind::ShapeMismatch, "values and weights differ in length");
    double total = 0.0, first = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        total += weights[i];
        first += weights[i] * values[i];
    }
    if (!(total > 0.0)) throw Error(ErrorKind::NoClutterMass, "total weight is zero");
    const double mean = first / total;
    double second = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double diff = values[i] - mean;
        second += weights[i] * diff * diff;
    }
    return {mean, std::sqrt(second / total), total};
}

ImageStats image_stats(const IntensityImage& image, const GmmParams& params, const RegionMasks* masks) {
    const auto values = image.values();
    std::vector<double> weights(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Posterior post = posterior(values[i], params);
        weights[i] = post.gamma[GmmParams::kClutterLow] + post.gamma[GmmParams::kClutterHigh];
    }
    const std::vector<double> ones(values.size(), 1.0);
    const WeightedMoments global = weighted_moments(values, ones);

    double mass = 0.0;
    for (double w : weights) mass += w;
    if (mass < 0.01 * static_cast<double>(values.size())) {
        throw Error(ErrorKind::NoClutterMass, "clutter posterior mass below 1% of pixels");
    }
    const WeightedMoments clutter = weighted_moments(values, weights);

    ImageStats stats;
    stats.clutter_mean = clutter.mean;
    stats.clutter_std = clutter.stddev;
    stats.global_mean = global.mean;
    stats.global_std = global.stddev;
    if (masks) {
        if (masks->height() != image.height() || masks->width() != image.width()) {
            throw Error(ErrorKind::ShapeMismatch, "masks do not match image shape");
        }
        std::vector<double> hard(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) hard[i] = masks->is(i, Region::Clutter) ? 1.0 : 0.0;
        if (masks->count(Region::Clutter) > 0) {
            const WeightedMoments m = weighted_moments(values, hard);
            stats.mask_clutter_mean = m.mean;
            stats.mask_clutter_std = m.stddev;
        }
    }
    return stats;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw Error(ErrorKind::EmptyPopulation, "KS statistic needs two non-empty samples");
    std::vector<double> xa(a.begin(), a.end()), xb(b.begin(), b.end());
    std::sort(xa.begin(), xa.end());
    std::sort(xb.begin(), xb.end());
    const auto na = static_cast<double>(xa.size()), nb = static_cast<double>(xb.size());
    std::size_t i = 0, j = 0;
    double best = 0.0;
    while (i < xa.size() && j < xb.size()) {
        const double x = std::min(xa[i], xb[j]);
        while (i < xa.size() && xa[i] == x) ++i;
        while (j < xb.size() && xb[j] == x) ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return best;
}

BinnedHistogram bin_values(std::span<const double> values, double lo, double hi, std::size_t bins) {
    BinnedHistogram out{lo, hi, std::vector<std::size_t>(bins, 0)};
    const double width = hi - lo;
    for (double v : values) {
        std::size_t bin = 0;
        if (width > 0.0) {
            const double scaled = (v - lo) / width * static_cast<double>(bins);
            bin = scaled <= 0.0 ? 0 : std::min(static_cast<std::size_t>(scaled), bins - 1);
        }
        ++out.counts[bin];
    }
    return out;
}

PopulationReport population_report(std::span<const ImageStats> stats_a, std::span<const ImageStats> stats_b) {
    if (stats_a.empty() || stats_b.empty()) throw Error(ErrorKind::EmptyPopulation, "both populations must be non-empty");
    auto column = [](std::span<const ImageStats> stats, double ImageStats::*field) {
        std::vector<double> out;
        out.reserve(stats.size());
        for (const auto& s : stats) out.push_back(s.*field);
        return out;
    };
    PopulationReport report;
    report.stats_a.assign(stats_a.begin(), stats_a.end());
    report.stats_b.assign(stats_b.begin(), stats_b.end());

    auto fill = [&](double ImageStats::*field, BinnedHistogram& ha, BinnedHistogram& hb) {
        const auto a = column(stats_a, field);
        const auto b = column(stats_b, field);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto* v : {&a, &b}) {
            for (double x : *v) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
        }
        ha = bin_values(a, lo, hi, PopulationReport::kBins);
        hb = bin_values(b, lo, hi, PopulationReport::kBins);
        return ks_statistic(a, b);
    };
    report.ks_clutter_mean = fill(&ImageStats::clutter_mean, report.clutter_mean_a, report.clutter_mean_b);
    report.ks_clutter_std = fill(&ImageStats::clutter_std, report.clutter_std_a, report.clutter_std_b);
    return report;
}

nlohmann::json to_json(const PopulationReport& report) {
    auto hist = [](const BinnedHistogram& h) { return nlohmann::json{{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}}; };
    auto summary = [](const std::vector<ImageStats>& stats) {
        std::vector<double> means, stds;
        for (const auto& s : stats) {
            means.push_back(s.clutter_mean);
            stds.push_back(s.clutter_std);
        }
        return nlohmann::json{{"count", stats.size()}, {"clutter_mean", means}, {"clutter_std", stds}};
    };
    return {
        {"population_a", summary(report.stats_a)},
        {"population_b", summary(report.stats_b)},
        {"bins", PopulationReport::kBins},
        {"clutter_mean_histogram", {{"a", hist(report.clutter_mean_a)}, {"b", hist(report.clutter_mean_b)}}},
        {"clutter_std_histogram", {{"a", hist(report.clutter_std_a)}, {"b", hist(report.clutter_std_b)}}},
        {"ks_clutter_mean", report.ks_clutter_mean},
        {"ks_clutter_std", report.ks_clutter_std},
    };
}

double clutter_mean_support_width(std::span<const ImageStats> stats) {
    if (stats.empty()) throw Error(ErrorKind::EmptyPopulation, "no stats");
    const auto [lo, hi] = std::minmax_element(stats.begin(), stats.end(), [](const ImageStats& a, const ImageStats& b) {
        return a.clutter_mean < b.clutter_mean;
    });
    return hi->clutter_mean - lo->clutter_mean;
}

std::vector<SweepPoint> nll_kernel_sweep(const Histogram& hist, std::span<const std::size_t> kernel_counts,
                                         const SsrConfig& cfg) {
    std::size_t largest = 0;
    for (std::size_t k : kernel_counts) {
        if (k == 0) throw Error(ErrorKind::InvalidConfig, "kernel counts must be >= 1");
        largest = std::max(largest, k);
    }
    constexpr double kSeedWeight = 1e-7;
    std::vector<MixtureFit> fits;
    fits.reserve(largest);
    for (std::size_t k = 1; k <= largest; ++k) {
        MixtureFit best = fit_mixture(hist, cfg, k);
        if (k > 1) {
            // Grow the previous solution by one near-weightless kernel placed
            // where the model under-explains the data most.
            std::vector<GaussianKernel> init = fits.back().kernels;
            std::size_t worst = 0;
            double worst_ratio = -1.0;
            for (std::size_t m = 0; m < hist.bin_count(); ++m) {
                if (hist.density(m) == 0.0) continue;
                const double model = mixture_density(hist.center(m), init) / static_cast<double>(hist.bin_count());
                const double ratio = hist.density(m) / std::max(model, std::numeric_limits<double>::min());
                if (ratio > worst_ratio) {
                    worst_ratio = ratio;
                    worst = m;
                }
            }
            for (auto& kernel : init) kernel.pi *= 1.0 - kSeedWeight;
            init.push_back({hist.center(worst), std::max(hist.stddev() / static_cast<double>(k), cfg.sigma_floor),
                            kSeedWeight});
            MixtureFit nested = fit_mixture(hist, cfg, std::move(init));
            if (nested.nll < best.nll) best = std::move(nested);
        }
        fits.push_back(std::move(best));
    }
    std::vector<SweepPoint> out;
    for (std::size_t k : kernel_counts) out.push_back({k, fits[k - 1].nll, fits[k - 1].iterations});
    return out;
}

} // namespace ssr
