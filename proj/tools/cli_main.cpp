#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace ssr::cli {

namespace {

/// Flags that override the resolved configuration (preset, then --config file).
struct ConfigFlags {
    std::string preset = "default";
    std::string config_path;
    double alpha = 0, beta = 0, sigma_s = 0, apply_prob = 0;
    std::size_t bins = 0;
    CLI::Option* alpha_opt = nullptr;
    CLI::Option* beta_opt = nullptr;
    CLI::Option* sigma_s_opt = nullptr;
    CLI::Option* apply_prob_opt = nullptr;
    CLI::Option* bins_opt = nullptr;

    void attach(CLI::App* app, bool randomization) {
        app->add_option("--preset", preset, "Named config preset (default, measured)");
        app->add_option("--config", config_path, "JSON config file mirroring SsrConfig fields");
        bins_opt = app->add_option("--bins", bins, "Histogram bin count");
        if (!randomization) return;
        alpha_opt = app->add_option("--alpha", alpha, "Kernel mean change-rate bound");
        beta_opt = app->add_option("--beta", beta, "Kernel std change-rate bound");
        sigma_s_opt = app->add_option("--sigma-s", sigma_s, "Additive noise std");
        apply_prob_opt = app->add_option("--apply-prob", apply_prob, "Per-image application probability");
    }

    SsrConfig resolve() const {
        SsrConfig cfg = config_preset(preset);
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open config " + config_path);
            nlohmann::json doc;
            try {
                in >> doc;
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::InvalidConfig, config_path + ": " + e.what());
            }
            cfg = config_from_json(doc, cfg);
        }
        auto set = [](CLI::Option* opt, auto& field, auto value) {
            if (opt && opt->count() > 0) field = value;
        };
        set(alpha_opt, cfg.alpha, alpha);
        set(beta_opt, cfg.beta, beta);
        set(sigma_s_opt, cfg.sigma_s, sigma_s);
        set(apply_prob_opt, cfg.apply_probability, apply_prob);
        set(bins_opt, cfg.bin_count, bins);
        cfg.validate();
        return cfg;
    }
};

std::vector<std::size_t> parse_kernel_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        unsigned long value = 0;
        try {
            value = std::stoul(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != item.size() || value == 0) throw Error(ErrorKind::InvalidConfig, "bad kernel count '" + item + "'");
        out.push_back(value);
    }
    if (out.empty()) throw Error(ErrorKind::InvalidConfig, "empty kernel count list");
    return out;
}

} // namespace

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Soft segmented randomization toolkit for radar intensity images", "ssr"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    std::string format_name = "ssrf";
    unsigned jobs = 1;
    std::uint64_t seed = 0;
    std::size_t replicas = 1;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    };
    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", format_name, "Output raster format")->check(CLI::IsMember({"ssrf", "png16"}));
    };

    PreprocessOptions pre;
    double c_override = 0.0;
    ConfigFlags pre_cfg;
    auto* preprocess = app.add_subcommand("preprocess", "Min-max normalize and log-map amplitude rasters");
    preprocess->add_option("input", pre.input_dir)->required();
    preprocess->add_option("output", pre.output_dir)->required();
    auto* c_opt = preprocess->add_option("--c", c_override, "Log-mapping brightness parameter");
    preprocess->add_option("--config", pre_cfg.config_path, "JSON config file");
    add_format(preprocess);
    add_common(preprocess);

    AugmentOptions aug;
    ConfigFlags aug_cfg;
    auto* augment = app.add_subcommand("augment", "Fit per-image mixtures and emit randomized replicas");
    augment->add_option("input", aug.input_dir)->required();
    augment->add_option("output", aug.output_dir)->required();
    augment->add_option("--seed", seed, "Base seed");
    augment->add_option("--replicas", replicas, "Augmented variants per input");
    aug_cfg.attach(augment, true);
    add_format(augment);
    add_common(augment);

    MergeOptions mrg;
    std::string scene_mask;
    auto* merge = app.add_subcommand("merge", "Merge measured targets onto random clutter crops");
    merge->add_option("measured", mrg.measured_dir)->required();
    merge->add_option("masks", mrg.masks_dir)->required();
    merge->add_option("scene", mrg.clutter_scene, "Large clutter scene (F32 raster)")->required();
    merge->add_option("output", mrg.output_dir)->required();
    merge->add_option("--scene-mask", scene_mask, "Mask PNG whose shadow pixels crops must avoid");
    merge->add_option("--seed", seed, "Base seed");
    add_format(merge);
    add_common(merge);

    HardsegOptions hs;
    std::string hs_masks;
    ConfigFlags hs_cfg;
    auto* hardseg = app.add_subcommand("hardseg", "Hard-segmentation ablation variants");
    hardseg->add_option("input", hs.input_dir)->required();
    hardseg->add_option("output", hs.output_dir)->required();
    hardseg->add_option("--variant", hs.variant, "1: noise everywhere; 2: background only")
        ->check(CLI::IsMember({1, 2}));
    hardseg->add_option("--masks", hs_masks, "Directory of mask PNGs (baseline segmenter otherwise)");
    hardseg->add_option("--seed", seed, "Base seed");
    hardseg->add_option("--replicas", replicas, "Variants per input");
    hs_cfg.attach(hardseg, true);
    add_format(hardseg);
    add_common(hardseg);

    StatsOptions st;
    std::string masks_a, masks_b;
    ConfigFlags st_cfg;
    auto* stats = app.add_subcommand("stats", "Clutter statistics and population comparison");
    stats->add_option("dir_a", st.dir_a)->required();
    stats->add_option("dir_b", st.dir_b)->required();
    stats->add_option("output", st.output, "Report path; .json and .csv are written")->required();
    stats->add_option("--masks-a", masks_a, "Mask PNGs for population A");
    stats->add_option("--masks-b", masks_b, "Mask PNGs for population B");
    st_cfg.attach(stats, false);
    add_common(stats);

    SweepOptions sw;
    std::string kernel_list = "1,2,3,4,5";
    std::string sweep_output;
    ConfigFlags sw_cfg;
    auto* sweep = app.add_subcommand("sweep-nll", "Converged NLL versus kernel count");
    sweep->add_option("image", sw.image)->required();
    sweep->add_option("--k", kernel_list, "Comma-separated kernel counts");
    sweep->add_option("--output", sweep_output, "Write JSON here instead of stdout");
    sw_cfg.attach(sweep, false);

    std::string replay_manifest, replay_output;
    auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("manifest", replay_manifest)->required();
    replay->add_option("--output", replay_output, "Output directory (default: the manifest's directory)");
    add_common(replay);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsage;
    }

    try {
        const auto format = io::parse_format(format_name);
        if (preprocess->parsed()) {
            SsrConfig cfg;
            if (!pre_cfg.config_path.empty()) cfg = load_config(pre_cfg.config_path);
            pre.c = c_opt->count() > 0 ? c_override : cfg.c;
            pre.format = format;
            pre.jobs = jobs;
            return run_preprocess(pre, err);
        }
        if (augment->parsed()) {
            aug.config = aug_cfg.resolve();
            aug.seed = seed;
            aug.replicas = replicas;
            aug.format = format;
            aug.jobs = jobs;
            return run_augment(aug, err);
        }
        if (merge->parsed()) {
            if (!scene_mask.empty()) mrg.scene_mask = scene_mask;
            mrg.seed = seed;
            mrg.format = format;
            mrg.jobs = jobs;
            return run_merge(mrg, err);
        }
        if (hardseg->parsed()) {
            if (!hs_masks.empty()) hs.masks_dir = hs_masks;
            hs.config = hs_cfg.resolve();
            hs.seed = seed;
            hs.replicas = replicas;
            hs.format = format;
            hs.jobs = jobs;
            return run_hardseg(hs, err);
        }
        if (stats->parsed()) {
            if (!masks_a.empty()) st.masks_a = masks_a;
            if (!masks_b.empty()) st.masks_b = masks_b;
            st.config = st_cfg.resolve();
            st.jobs = jobs;
            return run_stats(st, err);
        }
        if (sweep->parsed()) {
            sw.kernel_counts = parse_kernel_list(kernel_list);
            if (!sweep_output.empty()) sw.output = sweep_output;
            sw.config = sw_cfg.resolve();
            return run_sweep(sw, out, err);
        }
        if (replay->parsed()) {
            std::optional<std::filesystem::path> override_dir;
            if (!replay_output.empty()) override_dir = replay_output;
            return run_replay(replay_manifest, override_dir, jobs, err);
        }
    } catch (const Error& e) {
        err << "ssr: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::InvalidConfig:
            case ErrorKind::Io:
            case ErrorKind::EmptyPopulation:
                return kUsage;
            default:
                return kPartialFailure;
        }
    } catch (const std::exception& e) {
        err << "ssr: " << e.what() << "\n";
        return kPartialFailure;
    }
    return kUsage;
}

} // namespace ssr::cli
