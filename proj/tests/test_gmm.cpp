#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ssr/gmm.hpp"
#include "ssr/histogram.hpp"
#include "test_support.hpp"

using namespace ssr;
using ssr::testing::draw_mixture;

namespace {

Histogram histogram_of(const std::vector<double>& values, std::size_t bins = 256) {
    return compute_histogram(IntensityImage(1, values.size(), values), bins);
}

GmmParams params_of(std::array<GaussianKernel, 3> kernels) {
    GmmParams p;
    p.kernels = kernels;
    return p;
}

} // namespace

TEST_CASE("gaussian_pdf reference values") {
    const double unit_peak_sigma = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    CHECK(gaussian_pdf(0.3, {0.3, unit_peak_sigma, 1.0}) == doctest::Approx(1.0).epsilon(1e-14));
    // 1 / (0.1 sqrt(2 pi)) at 30 digits.
    CHECK(gaussian_pdf(0.5, {0.5, 0.1, 1.0}) == doctest::Approx(3.98942280401432677).epsilon(1e-14));
    for (double x : {0.01, 0.1, 0.37}) {
        CHECK(gaussian_pdf(0.4 + x, {0.4, 0.07, 1.0}) == doctest::Approx(gaussian_pdf(0.4 - x, {0.4, 0.07, 1.0})));
    }
}

TEST_CASE("posterior examples") {
    const GmmParams twins = params_of({{{0.3, 0.1, 0.5}, {0.3, 0.1, 0.5}, {0.9, 0.1, 0.0}}});
    const Posterior p = posterior(0.42, twins);
    CHECK(p.gamma[0] == doctest::Approx(0.5));
    CHECK(p.gamma[1] == doctest::Approx(0.5));
    CHECK(p.gamma[2] == 0.0);
    CHECK_FALSE(p.unsupported);

    // mu_2 = mu_3 twenty sigmas away from b = mu_1.
    const GmmParams far = params_of({{{0.2, 0.02, 0.2}, {0.6, 0.02, 0.4}, {0.6, 0.02, 0.4}}});
    CHECK(posterior(0.2, far).gamma[0] >= 0.999);
}

TEST_CASE("posterior sums to one even where densities underflow") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        GmmParams p;
        double total = 0.0;
        for (auto& k : p.kernels) {
            k = {u(gen), 1e-4 + 0.3 * u(gen), u(gen) + 1e-3};
            total += k.pi;
        }
        for (auto& k : p.kernels) k.pi /= total;
        const Posterior post = posterior(u(gen), p);
        REQUIRE(post.gamma[0] + post.gamma[1] + post.gamma[2] == doctest::Approx(1.0).epsilon(1e-12));
        for (double g : post.gamma) REQUIRE(g >= 0.0);
    }
    // Far tail of a needle kernel: linear-domain densities are all zero.
    const GmmParams needle = params_of({{{1.0, 1e-4, 0.3}, {1.0, 1e-4, 0.3}, {1.0, 1e-4, 0.4}}});
    const Posterior tail = posterior(0.0, needle);
    CHECK_FALSE(tail.unsupported);
    CHECK(tail.gamma[0] + tail.gamma[1] + tail.gamma[2] == doctest::Approx(1.0));
    CHECK(tail.gamma[2] == doctest::Approx(0.4));
}

TEST_CASE("posterior falls back to uniform when every weight vanishes") {
    const GmmParams dead = params_of({{{0.1, 0.1, 0.0}, {0.5, 0.1, 0.0}, {0.9, 0.1, 0.0}}});
    const Posterior p = posterior(0.5, dead);
    CHECK(p.unsupported);
    for (double g : p.gamma) CHECK(g == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("mixture_density reduces to a single kernel and integrates to one") {
    const GmmParams single = params_of({{{0.4, 0.05, 1.0}, {0.6, 0.1, 0.0}, {0.8, 0.1, 0.0}}});
    for (double x : {0.0, 0.3, 0.4, 0.9}) CHECK(mixture_density(x, single) == gaussian_pdf(x, single.kernels[0]));

    const GmmParams mix = params_of({{{0.15, 0.05, 0.45}, {0.35, 0.08, 0.35}, {0.75, 0.03, 0.2}}});
    // Trapezoid quadrature over [-1, 2] with step 1e-4.
    const double h = 1e-4;
    double integral = 0.0;
    for (int i = 0; i <= 30000; ++i) {
        const double x = -1.0 + h * i;
        const double f = mixture_density(x, mix);
        REQUIRE(f >= 0.0);
        integral += (i == 0 || i == 30000) ? 0.5 * f : f;
    }
    integral *= h;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("negative_log_likelihood examples") {
    const double unit_peak_sigma = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const Histogram one_bin({1.0, 0.0});
    const GmmParams unit = params_of({{{0.25, unit_peak_sigma, 1.0}, {0.5, 0.1, 0.0}, {0.9, 0.1, 0.0}}});
    CHECK(negative_log_likelihood(one_bin, unit) == doctest::Approx(0.0).epsilon(1e-14));

    // Independent 30-digit evaluation of -sum p_m log p_mix(b_m).
    const Histogram two({0.3, 0.7});
    const GmmParams hand = params_of({{{0.2, 0.1, 0.5}, {0.5, 0.2, 0.3}, {0.8, 0.05, 0.2}}});
    CHECK(negative_log_likelihood(two, hand) == doctest::Approx(-0.36467109688098386).epsilon(1e-13));

    const GmmParams dead = params_of({{{0.1, 0.1, 0.0}, {0.5, 0.1, 0.0}, {0.9, 0.1, 0.0}}});
    CHECK(std::isinf(negative_log_likelihood(two, dead)));
}

TEST_CASE("single-kernel fit matches sample moments") {
    const auto data = draw_mixture({{0.5, 0.05, 1.0}}, 128 * 128, 21);
    const double sample_mean = ssr::testing::mean_of(data);
    const double sample_std = ssr::testing::std_of(data);
    const MixtureFit fit = fit_mixture(histogram_of(data), SsrConfig{}, 1);
    REQUIRE(fit.kernels.size() == 1);
    // Binning moves each value by at most half a bin.
    CHECK(std::abs(fit.kernels[0].mu - sample_mean) <= 0.5 / 256);
    CHECK(std::abs(fit.kernels[0].sigma - sample_std) <= 0.5 / 256);
    CHECK(fit.kernels[0].pi == doctest::Approx(1.0));
}

TEST_CASE("fit_gmm recovers a known three-kernel mixture") {
    const std::vector<ssr::testing::TrueKernel> truth{{0.15, 0.05, 0.45}, {0.35, 0.05, 0.35}, {0.75, 0.05, 0.20}};
    const GmmParams fit = fit_gmm(histogram_of(draw_mixture(truth, 128 * 128, 8)), SsrConfig{});
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(fit.kernels[k].mu - truth[k].mu) <= 0.02);
    CHECK(fit.kernels[0].mu <= fit.kernels[1].mu);
    CHECK(fit.kernels[1].mu <= fit.kernels[2].mu);
    CHECK(fit.kernels[0].pi + fit.kernels[1].pi + fit.kernels[2].pi == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("EM trace is non-increasing from random initializations") {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SsrConfig cfg;
    for (int trial = 0; trial < 150; ++trial) {
        std::vector<ssr::testing::TrueKernel> truth;
        for (int k = 0; k < 3; ++k) truth.push_back({u(gen), 0.01 + 0.2 * u(gen), 0.1 + u(gen)});
        const Histogram hist = histogram_of(draw_mixture(truth, 4096, gen()), 16 + gen() % 300);
        std::vector<GaussianKernel> init(3);
        for (auto& k : init) k = {u(gen), 1e-3 + 0.5 * u(gen), 0.05 + u(gen)};
        const MixtureFit fit = fit_mixture(hist, cfg, init);
        for (std::size_t t = 1; t < fit.nll_trace.size(); ++t) {
            REQUIRE(fit.nll_trace[t] <= fit.nll_trace[t - 1] + 1e-9);
        }
        double total = 0.0;
        for (const auto& k : init) total += k.pi;
        for (auto& k : init) k.pi /= total;
        CHECK(fit.nll_trace.front() == doctest::Approx(negative_log_likelihood(hist, init)).epsilon(1e-12));
        REQUIRE(fit.nll <= fit.nll_trace.front() + 1e-9);
    }
}

TEST_CASE("fit invariants: weights, sigma floor, ordering, determinism") {
    SsrConfig cfg;
    cfg.sigma_floor = 1e-3;
    // Three isolated spikes force sigma onto the floor.
    std::vector<double> spikes;
    for (int i = 0; i < 300; ++i) spikes.push_back(i % 3 == 0 ? 0.1 : (i % 3 == 1 ? 0.5 : 0.9));
    const Histogram hist = histogram_of(spikes);
    const GmmParams a = fit_gmm(hist, cfg);
    const GmmParams b = fit_gmm(hist, cfg);
    CHECK(a == b);
    double total = 0.0;
    for (const auto& k : a.kernels) {
        CHECK(k.sigma >= cfg.sigma_floor);
        total += k.pi;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(a.kernels[0].mu <= a.kernels[1].mu);
    CHECK(a.kernels[1].mu <= a.kernels[2].mu);
}

TEST_CASE("fit_gmm rejects histograms with fewer than three occupied bins") {
    const Histogram two({0.5, 0.0, 0.5, 0.0});
    try {
        fit_gmm(two, SsrConfig{});
        FAIL("expected DegenerateHistogram");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateHistogram);
    }
}

TEST_CASE("convergence stops before the iteration cap on easy data") {
    const auto data = draw_mixture({{0.2, 0.03, 0.5}, {0.45, 0.04, 0.3}, {0.8, 0.03, 0.2}}, 16384, 4);
    SsrConfig cfg;
    const MixtureFit fit = fit_mixture(histogram_of(data), cfg, 3);
    CHECK(fit.converged);
    CHECK(fit.iterations < cfg.em_max_iters);
    CHECK(fit.nll_trace.size() == static_cast<std::size_t>(fit.iterations) + 1);
    cfg.em_max_iters = 3;
    const MixtureFit capped = fit_mixture(histogram_of(data), cfg, 3);
    CHECK(capped.iterations == 3);
}

TEST_CASE("restarts never worsen the fit") {
    const auto data = draw_mixture({{0.1, 0.02, 0.3}, {0.3, 0.02, 0.3}, {0.9, 0.02, 0.4}}, 8192, 17);
    const Histogram hist = histogram_of(data);
    SsrConfig cfg;
    const GmmParams plain = fit_gmm(hist, cfg);
    cfg.em_restarts = 4;
    const GmmParams restarted = fit_gmm(hist, cfg);
    CHECK(restarted.nll <= plain.nll);
    CHECK(fit_gmm(hist, cfg) == restarted);
}

TEST_CASE("GmmParams JSON round-trips bit-exactly") {
    const auto data = draw_mixture({{0.2, 0.05, 0.6}, {0.5, 0.05, 0.3}, {0.85, 0.03, 0.1}}, 4096, 2);
    const GmmParams fit = fit_gmm(histogram_of(data), SsrConfig{});
    const auto text = to_json(fit).dump();
    CHECK(gmm_from_json(nlohmann::json::parse(text)) == fit);
    CHECK_THROWS_AS(gmm_from_json(nlohmann::json::parse(R"({"kernels": [], "nll": 0, "iterations": 1})")), Error);
}
