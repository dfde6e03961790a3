#pragma once

// Shared fixtures for the test binaries. Generators here use <random> rather
// than the library RNG so the oracles stay independent of the code under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ssr/gmm.hpp"
#include "ssr/image.hpp"

namespace ssr::testing {

struct TrueKernel {
    double mu, sigma, pi;
};

/// n draws from a mixture, clipped to [0, 1].
inline std::vector<double> draw_mixture(const std::vector<TrueKernel>& kernels, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<double> weights;
    for (const auto& k : kernels) weights.push_back(k.pi);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::vector<double> out(n);
    for (auto& v : out) {
        const auto& k = kernels[pick(gen)];
        v = std::clamp(std::normal_distribution<double>(k.mu, k.sigma)(gen), 0.0, 1.0);
    }
    return out;
}

inline IntensityImage image_from(std::size_t h, std::size_t w, std::vector<double> values) {
    return IntensityImage(h, w, std::move(values));
}

/// Bright disk target, dark shadow blob and speckled clutter, all log-domain-like.
inline IntensityImage phantom(std::size_t size, double clutter_level, std::uint64_t seed, double clutter_sigma = 0.05) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> values(size * size);
    const double c = static_cast<double>(size) / 2.0;
    for (std::size_t r = 0; r < size; ++r) {
        for (std::size_t col = 0; col < size; ++col) {
            const double dr = static_cast<double>(r) - c, dc = static_cast<double>(col) - c;
            const double radius2 = dr * dr + dc * dc;
            const double shadow_r = static_cast<double>(r) - c - size * 0.22;
            double v;
            if (radius2 < (size * 0.12) * (size * 0.12)) {
                v = 0.85 + 0.04 * noise(gen);
            } else if (shadow_r * shadow_r + dc * dc < (size * 0.08) * (size * 0.08)) {
                v = 0.08 + 0.02 * noise(gen);
            } else {
                v = clutter_level + clutter_sigma * noise(gen);
            }
            values[r * size + col] = std::clamp(v, 0.0, 1.0);
        }
    }
    return IntensityImage(size, size, std::move(values));
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double std_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("ssr_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace ssr::testing

namespace ssr::testing {

/// CDF of a mixture whose draws are clipped to [0, 1]: atoms at 0 and 1.
inline double clipped_mixture_cdf(double x, std::span<const GaussianKernel> kernels, bool left_limit = false) {
    if (x < 0.0 || (x == 0.0 && left_limit)) return 0.0;
    if (x > 1.0 || (x == 1.0 && !left_limit)) return 1.0;
    double acc = 0.0;
    for (const auto& k : kernels) acc += k.pi * 0.5 * std::erfc(-(x - k.mu) / (k.sigma * std::sqrt(2.0)));
    return acc;
}

/// sup_x |F_n(x) - F(x)| for a sample against the clipped mixture, checking
/// both sides of every jump.
inline double ks_against_clipped_mixture(std::vector<double> sample, std::span<const GaussianKernel> kernels) {
    std::sort(sample.begin(), sample.end());
    const auto n = static_cast<double>(sample.size());
    double worst = 0.0;
    std::size_t i = 0;
    while (i < sample.size()) {
        const double x = sample[i];
        const double below = static_cast<double>(i) / n;
        while (i < sample.size() && sample[i] == x) ++i;
        const double at = static_cast<double>(i) / n;
        worst = std::max(worst, std::abs(below - clipped_mixture_cdf(x, kernels, true)));
        worst = std::max(worst, std::abs(at - clipped_mixture_cdf(x, kernels)));
    }
    return worst;
}

} // namespace ssr::testing
