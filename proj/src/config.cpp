#include "ssr/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "ssr/error.hpp"

namespace ssr {

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw Error(ErrorKind::InvalidConfig, message);
}

} // namespace

void SsrConfig::validate() const {
    require(std::isfinite(c) && c > 0.0, "c must be > 0");
    require(std::isfinite(sigma_s) && sigma_s >= 0.0, "sigma_s must be >= 0");
    require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0, 1)");
    require(beta >= 0.0 && beta < 1.0, "beta must lie in [0, 1)");
    require(apply_probability >= 0.0 && apply_probability <= 1.0, "apply_probability must lie in [0, 1]");
    require(bin_count >= 2, "bin_count must be >= 2");
    require(em_max_iters >= 1, "em_max_iters must be >= 1");
    require(std::isfinite(em_tolerance) && em_tolerance >= 0.0, "em_tolerance must be >= 0");
    require(std::isfinite(sigma_floor) && sigma_floor > 0.0, "sigma_floor must be > 0");
    require(em_restarts >= 0, "em_restarts must be >= 0");
}

SsrConfig config_preset(const std::string& name) {
    SsrConfig cfg;
    if (name == "default") return cfg;
    if (name == "measured") {
        cfg.sigma_s = 0.2;
        return cfg;
    }
    throw Error(ErrorKind::InvalidConfig, "unknown preset '" + name + "'");
}

nlohmann::json to_json(const SsrConfig& config) {
    return {
        {"c", config.c},
        {"sigma_s", config.sigma_s},
        {"alpha", config.alpha},
        {"beta", config.beta},
        {"bin_count", config.bin_count},
        {"apply_probability", config.apply_probability},
        {"em_max_iters", config.em_max_iters},
        {"em_tolerance", config.em_tolerance},
        {"sigma_floor", config.sigma_floor},
        {"em_restarts", config.em_restarts},
    };
}

SsrConfig config_from_json(const nlohmann::json& doc, SsrConfig base) {
    if (!doc.is_object()) throw Error(ErrorKind::InvalidConfig, "config must be a JSON object");
    static const std::set<std::string> known = {"c", "sigma_s", "alpha", "beta", "bin_count", "apply_probability",
                                                "em_max_iters", "em_tolerance", "sigma_floor", "em_restarts",
                                                "preset"};
    for (const auto& [key, value] : doc.items()) {
        if (!known.count(key)) throw Error(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
    }
    try {
        if (doc.contains("preset")) base = config_preset(doc.at("preset").get<std::string>());
        auto take = [&](const char* key, auto& field) {
            if (doc.contains(key)) field = doc.at(key).get<std::decay_t<decltype(field)>>();
        };
        take("c", base.c);
        take("sigma_s", base.sigma_s);
        take("alpha", base.alpha);
        take("beta", base.beta);
        take("bin_count", base.bin_count);
        take("apply_probability", base.apply_probability);
        take("em_max_iters", base.em_max_iters);
        take("em_tolerance", base.em_tolerance);
        take("sigma_floor", base.sigma_floor);
        take("em_restarts", base.em_restarts);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, e.what());
    }
    base.validate();
    return base;
}

SsrConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, path + ": " + e.what());
    }
    return config_from_json(doc);
}

} // namespace ssr
