#include "ssr/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ssr {

Histogram::Histogram(std::vector<double> densities) : densities_(std::move(densities)) {
    if (densities_.size() < 2) throw Error(ErrorKind::InvalidConfig, "histogram needs at least 2 bins");
    double total = 0.0;
    for (double d : densities_) {
        if (!(d >= 0.0) || !std::isfinite(d)) throw Error(ErrorKind::InvalidImage, "histogram density must be >= 0");
        total += d;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::InvalidImage, "histogram densities must sum to 1");
}

std::vector<double> Histogram::centers() const {
    std::vector<double> out(densities_.size());
    for (std::size_t m = 0; m < out.size(); ++m) out[m] = center(m);
    return out;
}

std::size_t Histogram::non_empty_bins() const noexcept {
    return static_cast<std::size_t>(std::count_if(densities_.begin(), densities_.end(), [](double d) { return d > 0.0; }));
}

double Histogram::mean() const noexcept {
    double acc = 0.0;
    for (std::size_t m = 0; m < densities_.size(); ++m) acc += densities_[m] * center(m);
    return acc;
}

double Histogram::stddev() const noexcept {
    const double mu = mean();
    double acc = 0.0;
    for (std::size_t m = 0; m < densities_.size(); ++m) {
        const double diff = center(m) - mu;
        acc += densities_[m] * diff * diff;
    }
    return std::sqrt(acc);
}

double Histogram::quantile(double q) const noexcept {
    double cumulative = 0.0;
    for (std::size_t m = 0; m < densities_.size(); ++m) {
        cumulative += densities_[m];
        if (cumulative >= q && densities_[m] > 0.0) return center(m);
    }
    // q at or beyond the accumulated total: last occupied bin.
    for (std::size_t m = densities_.size(); m-- > 0;) {
        if (densities_[m] > 0.0) return center(m);
    }
    return center(densities_.size() - 1);
}

std::size_t Histogram::bin_of(double value, std::size_t bin_count) noexcept {
    const double scaled = value * static_cast<double>(bin_count);
    if (!(scaled > 0.0)) return 0;
    const auto bin = static_cast<std::size_t>(scaled);
    return std::min(bin, bin_count - 1);
}

Histogram compute_histogram(const IntensityImage& image, std::size_t bin_count) {
    if (bin_count < 2) throw Error(ErrorKind::InvalidConfig, "bin count must be >= 2");
    std::vector<std::size_t> counts(bin_count, 0);
    for (double v : image.values()) ++counts[Histogram::bin_of(v, bin_count)];
    const auto total = static_cast<double>(image.size());
    std::vector<double> densities(bin_count);
    for (std::size_t m = 0; m < bin_count; ++m) densities[m] = static_cast<double>(counts[m]) / total;
    return Histogram(std::move(densities));
}

} // namespace ssr
