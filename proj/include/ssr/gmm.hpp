#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "ssr/config.hpp"
#include "ssr/histogram.hpp"

namespace ssr {

struct GaussianKernel {
    double mu = 0.0;
    double sigma = 1.0;
    double pi = 0.0;

    friend bool operator==(const GaussianKernel&, const GaussianKernel&) = default;
};

/// Three-kernel fit of an image histogram, sorted by ascending mean:
/// two clutter kernels followed by the target kernel.
struct GmmParams {
    static constexpr std::size_t kClutterLow = 0;
    static constexpr std::size_t kClutterHigh = 1;
    static constexpr std::size_t kTarget = 2;

    std::array<GaussianKernel, 3> kernels{};
    double nll = 0.0;
    int iterations = 0;

    const GaussianKernel& clutter_low() const noexcept { return kernels[kClutterLow]; }
    const GaussianKernel& clutter_high() const noexcept { return kernels[kClutterHigh]; }
    const GaussianKernel& target() const noexcept { return kernels[kTarget]; }

    friend bool operator==(const GmmParams&, const GmmParams&) = default;
};

/// Result of an arbitrary-K fit. `nll_trace[t]` is the NLL of the parameters
/// after t EM updates (entry 0 is the initialization).
struct MixtureFit {
    std::vector<GaussianKernel> kernels;
    double nll = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> nll_trace;
};

double gaussian_pdf(double x, const GaussianKernel& kernel) noexcept;

double mixture_density(double x, std::span<const GaussianKernel> kernels) noexcept;
inline double mixture_density(double x, const GmmParams& params) noexcept {
    return mixture_density(x, params.kernels);
}

struct Posterior {
    std::array<double, 3> gamma{};
    /// Every weighted density vanished; gamma falls back to 1/3 each.
    bool unsupported = false;
};

/// Responsibilities of the three kernels for intensity x (log-domain evaluation).
Posterior posterior(double x, const GmmParams& params) noexcept;

/// Generic-K responsibilities written into `gamma` (size K). Returns false
/// when the bin is unsupported, in which case gamma is uniform.
bool posterior(double x, std::span<const GaussianKernel> kernels, std::span<double> gamma) noexcept;

/// Density-weighted NLL: -sum_m p(b_m) log p_mix(b_m). Returns +infinity when
/// a bin carrying mass has zero mixture density.
double negative_log_likelihood(const Histogram& hist, std::span<const GaussianKernel> kernels) noexcept;
inline double negative_log_likelihood(const Histogram& hist, const GmmParams& params) noexcept {
    return negative_log_likelihood(hist, params.kernels);
}

/// Deterministic K-kernel initialization. For K = 3 the means sit at the 25th,
/// 50th and 90th histogram percentiles; otherwise at the (k + 0.5)/K
/// percentiles. All sigmas start at the histogram std, all weights at 1/K.
std::vector<GaussianKernel> default_initialization(const Histogram& hist, std::size_t kernel_count,
                                                   double sigma_floor);

/// Runs EM from `init` until the relative NLL change drops below
/// cfg.em_tolerance or cfg.em_max_iters updates have been made.
/// Kernels are returned sorted by mean. Throws DegenerateHistogram when fewer
/// than three bins carry mass.
MixtureFit fit_mixture(const Histogram& hist, const SsrConfig& cfg, std::vector<GaussianKernel> init);
MixtureFit fit_mixture(const Histogram& hist, const SsrConfig& cfg, std::size_t kernel_count);

/// The three-kernel fit used by the augmentation pipeline.
GmmParams fit_gmm(const Histogram& hist, const SsrConfig& cfg);

nlohmann::json to_json(const GmmParams& params);
GmmParams gmm_from_json(const nlohmann::json& doc);

} // namespace ssr
