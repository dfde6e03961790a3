#pragma once

#include <cstddef>
#include <string>

#include <json.hpp>

namespace ssr {

/// Every knob of the augmentation pipeline. Defaults reproduce the
/// published setup (c = 1000, sigma_s = 0.3, alpha = 0.6, beta = 0.4, p = 0.5).
struct SsrConfig {
    double c = 1000.0;
    double sigma_s = 0.3;
    double alpha = 0.6;
    double beta = 0.4;
    std::size_t bin_count = 256;
    double apply_probability = 0.5;
    int em_max_iters = 200;
    double em_tolerance = 1e-6;
    double sigma_floor = 1e-4;
    /// Extra randomly-initialized EM runs; the lowest-NLL fit wins. 0 keeps
    /// the fit fully deterministic from the percentile initialization.
    int em_restarts = 0;

    /// Throws InvalidConfig describing the first violated bound.
    void validate() const;

    friend bool operator==(const SsrConfig&, const SsrConfig&) = default;
};

/// Named presets: "default" and "measured" (weaker noise, sigma_s = 0.2).
SsrConfig config_preset(const std::string& name);

nlohmann::json to_json(const SsrConfig& config);
/// Missing keys keep `base` values; unknown keys are rejected.
SsrConfig config_from_json(const nlohmann::json& doc, SsrConfig base = {});
SsrConfig load_config(const std::string& path);

} // namespace ssr
