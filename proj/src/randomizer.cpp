#include "ssr/randomizer.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ssr/histogram.hpp"
#include "ssr/parallel.hpp"

namespace ssr {

Raster add_noise(const IntensityImage& image, double sigma_s, Rng& rng) {
    if (!(sigma_s >= 0.0) || !std::isfinite(sigma_s)) throw Error(ErrorKind::InvalidConfig, "sigma_s must be >= 0");
    Raster out = image.raster();
    for (double& v : out.values()) v += sigma_s * rng.normal();
    return out;
}

KernelDeltas draw_deltas(double alpha, double beta, Rng& rng) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidConfig, "alpha must lie in [0, 1)");
    if (!(beta >= 0.0 && beta < 1.0)) throw Error(ErrorKind::InvalidConfig, "beta must lie in [0, 1)");
    KernelDeltas d;
    d.delta_mu = rng.uniform(-alpha, alpha);
    d.delta_sigma = rng.uniform(-beta, beta);
    return d;
}

GmmParams adjust_kernels(const GmmParams& params, const KernelDeltas& deltas, double sigma_floor) {
    GmmParams out = params;
    for (std::size_t k : {GmmParams::kClutterLow, GmmParams::kClutterHigh}) {
        out.kernels[k].mu = params.kernels[k].mu * (1.0 + deltas.delta_mu);
        out.kernels[k].sigma = std::max(params.kernels[k].sigma * (1.0 + deltas.delta_sigma), sigma_floor);
    }
    return out;
}

IntensityImage sample_mixture(const GmmParams& params, std::size_t height, std::size_t width, Rng& rng) {
    std::array<double, 3> cumulative{};
    double running = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        running += params.kernels[k].pi;
        cumulative[k] = running;
    }
    Raster out(height, width);
    for (double& v : out.values()) {
        const double u = rng.uniform() * running;
        std::size_t k = 0;
        while (k < 2 && (u >= cumulative[k] || params.kernels[k].pi == 0.0)) ++k;
        const auto& kernel = params.kernels[k];
        v = std::clamp(kernel.mu + kernel.sigma * rng.normal(), 0.0, 1.0);
    }
    return IntensityImage(std::move(out));
}

IntensityImage histogram_match(const Raster& source, const Raster& reference) {
    if (source.size() != reference.size()) {
        throw Error(ErrorKind::ShapeMismatch, "histogram matching needs equal pixel counts");
    }
    const std::size_t n = source.size();
    std::vector<std::pair<double, std::size_t>> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = {source[i], i};
    std::sort(order.begin(), order.end());

    std::vector<double> sorted_reference(reference.values().begin(), reference.values().end());
    std::sort(sorted_reference.begin(), sorted_reference.end());

    Raster out(source.height(), source.width());
    for (std::size_t r = 0; r < n; ++r) out[order[r].second] = sorted_reference[r];
    return IntensityImage::clipped(std::move(out));
}

IntensityImage ssr_augment_with_deltas(const IntensityImage& image, const GmmParams& params, const SsrConfig& cfg,
                                       const KernelDeltas& deltas, Rng& rng) {
    const Raster noised = add_noise(image, cfg.sigma_s, rng);
    const GmmParams adjusted = adjust_kernels(params, deltas, cfg.sigma_floor);
    const IntensityImage sampled = sample_mixture(adjusted, image.height(), image.width(), rng);
    return histogram_match(noised, sampled.raster());
}

IntensityImage ssr_augment(const IntensityImage& image, const GmmParams& params, const SsrConfig& cfg, Rng& rng,
                           AugmentTrace* trace) {
    cfg.validate();
    // Stream order: noise, deltas, samples.
    const Raster noised = add_noise(image, cfg.sigma_s, rng);
    const KernelDeltas deltas = draw_deltas(cfg.alpha, cfg.beta, rng);
    const GmmParams adjusted = adjust_kernels(params, deltas, cfg.sigma_floor);
    const IntensityImage sampled = sample_mixture(adjusted, image.height(), image.width(), rng);
    if (trace) *trace = {deltas, adjusted};
    return histogram_match(noised, sampled.raster());
}

nlohmann::json to_json(const AugmentRecord& record) {
    return {
        {"base_seed", record.base_seed},
        {"image_index", record.image_index},
        {"replica", record.replica},
        {"applied", record.applied},
        {"delta_mu", record.deltas.delta_mu},
        {"delta_sigma", record.deltas.delta_sigma},
        {"sigma_s", record.sigma_s},
        {"gmm", to_json(record.gmm)},
        {"rng", std::string(Rng::kAlgorithm)},
    };
}

IntensityImage augment_one(const IntensityImage& image, const GmmParams& params, const SsrConfig& cfg,
                           std::uint64_t base_seed, std::uint64_t image_index, std::uint64_t replica,
                           AugmentRecord* record) {
    Rng rng(stream_seed(base_seed, image_index, replica));
    const bool applied = rng.uniform() < cfg.apply_probability;
    AugmentRecord rec;
    rec.base_seed = base_seed;
    rec.image_index = image_index;
    rec.replica = replica;
    rec.applied = applied;
    rec.sigma_s = cfg.sigma_s;
    rec.gmm = params;
    IntensityImage out = image;
    if (applied) {
        AugmentTrace trace;
        out = ssr_augment(image, params, cfg, rng, &trace);
        rec.deltas = trace.deltas;
    }
    if (record) *record = rec;
    return out;
}

std::vector<IntensityImage> augment_batch(const std::vector<IntensityImage>& images,
                                          const std::vector<GmmParams>& params, const SsrConfig& cfg,
                                          std::uint64_t base_seed, std::vector<AugmentRecord>* records,
                                          unsigned jobs) {
    cfg.validate();
    if (images.size() != params.size()) throw Error(ErrorKind::ShapeMismatch, "one GMM fit per image required");
    std::vector<IntensityImage> out(images);
    std::vector<AugmentRecord> recs(images.size());
    parallel_for(images.size(), jobs, [&](std::size_t i) {
        out[i] = augment_one(images[i], params[i], cfg, base_seed, i, 0, &recs[i]);
    });
    if (records) *records = std::move(recs);
    return out;
}

std::vector<IntensityImage> augment_batch(const std::vector<IntensityImage>& images, const SsrConfig& cfg,
                                          std::uint64_t base_seed, std::vector<AugmentRecord>* records,
                                          unsigned jobs) {
    cfg.validate();
    std::vector<GmmParams> params(images.size());
    parallel_for(images.size(), jobs,
                 [&](std::size_t i) { params[i] = fit_gmm(compute_histogram(images[i], cfg.bin_count), cfg); });
    return augment_batch(images, params, cfg, base_seed, records, jobs);
}

} // namespace ssr
