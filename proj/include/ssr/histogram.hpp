#pragma once

#include <cstddef>
#include <vector>

#include "ssr/image.hpp"

namespace ssr {

/// Normalized intensity histogram over M uniform bins on [0, 1].
/// Bin m (0-based) covers [m/M, (m+1)/M) and is centered at (m + 0.5)/M;
/// the last bin is closed so 1.0 is kept.
class Histogram {
public:
    /// Throws InvalidConfig if densities.size() < 2, InvalidImage if the
    /// densities are negative or do not sum to 1.
    explicit Histogram(std::vector<double> densities);

    std::size_t bin_count() const noexcept { return densities_.size(); }
    double center(std::size_t bin) const noexcept {
        return (static_cast<double>(bin) + 0.5) / static_cast<double>(densities_.size());
    }
    double density(std::size_t bin) const noexcept { return densities_[bin]; }
    const std::vector<double>& densities() const noexcept { return densities_; }
    std::vector<double> centers() const;

    std::size_t non_empty_bins() const noexcept;
    double mean() const noexcept;
    double stddev() const noexcept;
    /// Center of the first bin whose cumulative density reaches q.
    double quantile(double q) const noexcept;

    /// Bin index for an intensity in [0, 1].
    static std::size_t bin_of(double value, std::size_t bin_count) noexcept;

    friend bool operator==(const Histogram&, const Histogram&) = default;

private:
    std::vector<double> densities_;
};

Histogram compute_histogram(const IntensityImage& image, std::size_t bin_count);

} // namespace ssr
