#include "ssr/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ssr/rng.hpp"

namespace ssr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kHalfLogTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

double log_pdf(double x, const GaussianKernel& k) noexcept {
    const double z = (x - k.mu) / k.sigma;
    return -0.5 * z * z - std::log(k.sigma) - kHalfLogTwoPi;
}

/// Fills log(pi_k N(x | k)) and returns their log-sum-exp (-inf if all vanish).
double weighted_log_densities(double x, std::span<const GaussianKernel> kernels, std::span<double> out) noexcept {
    double peak = -kInf;
    for (std::size_t k = 0; k < kernels.size(); ++k) {
        out[k] = kernels[k].pi > 0.0 ? std::log(kernels[k].pi) + log_pdf(x, kernels[k]) : -kInf;
        peak = std::max(peak, out[k]);
    }
    if (peak == -kInf) return -kInf;
    double acc = 0.0;
    for (std::size_t k = 0; k < kernels.size(); ++k) acc += std::exp(out[k] - peak);
    return peak + std::log(acc);
}

void sort_by_mean(std::vector<GaussianKernel>& kernels) {
    std::stable_sort(kernels.begin(), kernels.end(),
                     [](const GaussianKernel& a, const GaussianKernel& b) { return a.mu < b.mu; });
}

void normalize_weights(std::vector<GaussianKernel>& kernels) {
    double total = 0.0;
    for (const auto& k : kernels) total += k.pi;
    for (auto& k : kernels) k.pi /= total;
}

struct Workspace {
    std::vector<double> centers;
    std::vector<double> weights;  // histogram density of occupied bins
    std::vector<double> gamma;    // bins x K
    std::vector<double> scratch;
};

/// E-step: responsibilities for every occupied bin; returns the weighted NLL.
double expectation(Workspace& ws, std::span<const GaussianKernel> kernels) {
    const std::size_t K = kernels.size();
    double nll = 0.0;
    for (std::size_t m = 0; m < ws.centers.size(); ++m) {
        std::span<double> row(ws.gamma.data() + m * K, K);
        const double lse = weighted_log_densities(ws.centers[m], kernels, ws.scratch);
        if (lse == -kInf) {
            std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(K));
            nll = kInf;
            continue;
        }
        for (std::size_t k = 0; k < K; ++k) row[k] = std::exp(ws.scratch[k] - lse);
        nll -= ws.weights[m] * lse;
    }
    return nll;
}

void maximization(const Workspace& ws, std::vector<GaussianKernel>& kernels, double sigma_floor) {
    const std::size_t K = kernels.size();
    for (std::size_t k = 0; k < K; ++k) {
        double mass = 0.0;
        double first = 0.0;
        for (std::size_t m = 0; m < ws.centers.size(); ++m) {
            const double w = ws.weights[m] * ws.gamma[m * K + k];
            mass += w;
            first += w * ws.centers[m];
        }
        if (!(mass > 0.0)) {
            // Dead kernel: zero weight, location irrelevant.
            kernels[k].pi = 0.0;
            continue;
        }
        const double mu = first / mass;
        double second = 0.0;
        for (std::size_t m = 0; m < ws.centers.size(); ++m) {
            const double diff = ws.centers[m] - mu;
            second += ws.weights[m] * ws.gamma[m * K + k] * diff * diff;
        }
        kernels[k].mu = mu;
        kernels[k].sigma = std::max(std::sqrt(second / mass), sigma_floor);
        kernels[k].pi = mass;
    }
    normalize_weights(kernels);
}

MixtureFit run_em(const Histogram& hist, const SsrConfig& cfg, std::vector<GaussianKernel> kernels) {
    Workspace ws;
    for (std::size_t m = 0; m < hist.bin_count(); ++m) {
        if (hist.density(m) > 0.0) {
            ws.centers.push_back(hist.center(m));
            ws.weights.push_back(hist.density(m));
        }
    }
    const std::size_t K = kernels.size();
    ws.gamma.assign(ws.centers.size() * K, 0.0);
    ws.scratch.assign(K, 0.0);

    MixtureFit fit;
    fit.nll_trace.reserve(static_cast<std::size_t>(cfg.em_max_iters) + 1);
    double previous = expectation(ws, kernels);
    fit.nll_trace.push_back(previous);
    for (int iter = 1; iter <= cfg.em_max_iters; ++iter) {
        maximization(ws, kernels, cfg.sigma_floor);
        const double current = expectation(ws, kernels);
        fit.nll_trace.push_back(current);
        fit.iterations = iter;
        if (std::abs(previous - current) <= cfg.em_tolerance * std::abs(previous)) {
            fit.converged = true;
            break;
        }
        previous = current;
    }
    fit.nll = fit.nll_trace.back();
    sort_by_mean(kernels);
    fit.kernels = std::move(kernels);
    return fit;
}

void require_fit_inputs(const Histogram& hist, const SsrConfig& cfg) {
    cfg.validate();
    if (hist.non_empty_bins() < 3) {
        throw Error(ErrorKind::DegenerateHistogram, "need at least 3 non-empty bins to fit a mixture");
    }
}

} // namespace

double gaussian_pdf(double x, const GaussianKernel& kernel) noexcept {
    const double z = (x - kernel.mu) / kernel.sigma;
    return std::exp(-0.5 * z * z) / (kernel.sigma * std::sqrt(2.0 * std::numbers::pi));
}

double mixture_density(double x, std::span<const GaussianKernel> kernels) noexcept {
    double acc = 0.0;
    for (const auto& k : kernels) acc += k.pi * gaussian_pdf(x, k);
    return acc;
}

bool posterior(double x, std::span<const GaussianKernel> kernels, std::span<double> gamma) noexcept {
    const double lse = weighted_log_densities(x, kernels, gamma);
    if (lse == -kInf) {
        std::fill(gamma.begin(), gamma.end(), 1.0 / static_cast<double>(kernels.size()));
        return false;
    }
    for (double& g : gamma) g = std::exp(g - lse);
    return true;
}

Posterior posterior(double x, const GmmParams& params) noexcept {
    Posterior out;
    out.unsupported = !posterior(x, params.kernels, out.gamma);
    return out;
}

double negative_log_likelihood(const Histogram& hist, std::span<const GaussianKernel> kernels) noexcept {
    std::vector<double> scratch(kernels.size());
    double nll = 0.0;
    for (std::size_t m = 0; m < hist.bin_count(); ++m) {
        const double p = hist.density(m);
        if (p == 0.0) continue;
        const double lse = weighted_log_densities(hist.center(m), kernels, scratch);
        if (lse == -kInf) return kInf;
        nll -= p * lse;
    }
    return nll;
}

std::vector<GaussianKernel> default_initialization(const Histogram& hist, std::size_t kernel_count,
                                                   double sigma_floor) {
    if (kernel_count == 0) throw Error(ErrorKind::InvalidConfig, "kernel count must be >= 1");
    const double sigma = std::max(hist.stddev(), sigma_floor);
    const double weight = 1.0 / static_cast<double>(kernel_count);
    std::vector<GaussianKernel> kernels(kernel_count);
    for (std::size_t k = 0; k < kernel_count; ++k) {
        double q = (static_cast<double>(k) + 0.5) / static_cast<double>(kernel_count);
        if (kernel_count == 3) q = std::array{0.25, 0.50, 0.90}[k];
        kernels[k] = {hist.quantile(q), sigma, weight};
    }
    return kernels;
}

MixtureFit fit_mixture(const Histogram& hist, const SsrConfig& cfg, std::vector<GaussianKernel> init) {
    require_fit_inputs(hist, cfg);
    if (init.empty()) throw Error(ErrorKind::InvalidConfig, "mixture needs at least one kernel");
    for (auto& k : init) {
        if (!std::isfinite(k.mu) || !std::isfinite(k.sigma) || !(k.pi >= 0.0)) {
            throw Error(ErrorKind::InvalidConfig, "invalid initial kernel");
        }
        k.sigma = std::max(k.sigma, cfg.sigma_floor);
    }
    normalize_weights(init);
    return run_em(hist, cfg, std::move(init));
}

MixtureFit fit_mixture(const Histogram& hist, const SsrConfig& cfg, std::size_t kernel_count) {
    require_fit_inputs(hist, cfg);
    MixtureFit best = fit_mixture(hist, cfg, default_initialization(hist, kernel_count, cfg.sigma_floor));
    if (cfg.em_restarts == 0) return best;

    // Restart streams are fixed so a given config always yields the same fit.
    Rng rng(derive_seed(0x5eed5eed5eed5eedULL, kernel_count));
    const double sigma = std::max(hist.stddev(), cfg.sigma_floor);
    for (int r = 0; r < cfg.em_restarts; ++r) {
        std::vector<double> qs(kernel_count);
        for (double& q : qs) q = rng.uniform();
        std::sort(qs.begin(), qs.end());
        std::vector<GaussianKernel> init(kernel_count);
        for (std::size_t k = 0; k < kernel_count; ++k) {
            init[k] = {hist.quantile(qs[k]), sigma, 1.0 / static_cast<double>(kernel_count)};
        }
        MixtureFit candidate = fit_mixture(hist, cfg, std::move(init));
        if (candidate.nll < best.nll) best = std::move(candidate);
    }
    return best;
}

GmmParams fit_gmm(const Histogram& hist, const SsrConfig& cfg) {
    const MixtureFit fit = fit_mixture(hist, cfg, 3);
    GmmParams params;
    std::copy(fit.kernels.begin(), fit.kernels.end(), params.kernels.begin());
    params.nll = fit.nll;
    params.iterations = fit.iterations;
    return params;
}

nlohmann::json to_json(const GmmParams& params) {
    nlohmann::json kernels = nlohmann::json::array();
    for (const auto& k : params.kernels) kernels.push_back({{"mu", k.mu}, {"sigma", k.sigma}, {"pi", k.pi}});
    nlohmann::json nll = std::isfinite(params.nll) ? nlohmann::json(params.nll) : nlohmann::json(nullptr);
    return {{"kernels", kernels}, {"nll", nll}, {"iterations", params.iterations}};
}

GmmParams gmm_from_json(const nlohmann::json& doc) {
    try {
        const auto& kernels = doc.at("kernels");
        if (!kernels.is_array() || kernels.size() != 3) {
            throw Error(ErrorKind::Format, "GMM document must hold exactly 3 kernels");
        }
        GmmParams params;
        for (std::size_t k = 0; k < 3; ++k) {
            params.kernels[k] = {kernels[k].at("mu").get<double>(), kernels[k].at("sigma").get<double>(),
                                 kernels[k].at("pi").get<double>()};
            if (!(params.kernels[k].sigma > 0.0)) throw Error(ErrorKind::Format, "kernel sigma must be > 0");
        }
        const auto& nll = doc.at("nll");
        params.nll = nll.is_null() ? kInf : nll.get<double>();
        params.iterations = doc.at("iterations").get<int>();
        return params;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Format, std::string("malformed GMM document: ") + e.what());
    }
}

} // namespace ssr
