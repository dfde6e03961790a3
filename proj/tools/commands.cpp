#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ssr/clutter.hpp"
#include "ssr/gmm.hpp"
#include "ssr/histogram.hpp"
#include "ssr/parallel.hpp"
#include "ssr/randomizer.hpp"
#include "ssr/stats.hpp"

namespace ssr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestName = "manifest.json";

enum class FileStatus { Ok, Skipped, Failed };

const char* to_string(FileStatus status) {
    switch (status) {
        case FileStatus::Ok: return "ok";
        case FileStatus::Skipped: return "skipped";
        case FileStatus::Failed: return "failed";
    }
    return "failed";
}

struct FileResult {
    FileStatus status = FileStatus::Ok;
    std::string message;
    json detail = json::object();
};

std::string format_name(io::ImageFormat format) { return format == io::ImageFormat::Ssrf ? "ssrf" : "png16"; }

fs::path with_suffix(const fs::path& rel, const std::string& suffix) {
    fs::path out = rel;
    out.replace_extension();
    out += suffix;
    return out;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json base_manifest(const char* command) {
    return {{"tool", kToolVersion}, {"command", command}, {"rng", std::string(Rng::kAlgorithm)}};
}

void require_directory(const fs::path& dir, const char* role) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, std::string(role) + " directory not found: " + dir.string());
}

/// Runs `task` per file in parallel and assembles the ordered manifest list.
template <typename Task>
int process_files(const std::vector<fs::path>& files, unsigned jobs, std::ostream& log, json& manifest, Task&& task) {
    std::vector<FileResult> results(files.size());
    parallel_for(files.size(), jobs, [&](std::size_t i) {
        try {
            results[i] = task(i, files[i]);
        } catch (const std::exception& e) {
            results[i].status = FileStatus::Failed;
            results[i].message = e.what();
        }
    });
    json entries = json::array();
    bool failed = false;
    for (std::size_t i = 0; i < files.size(); ++i) {
        json entry = results[i].detail;
        entry["input"] = files[i].generic_string();
        entry["status"] = to_string(results[i].status);
        if (!results[i].message.empty()) entry["message"] = results[i].message;
        if (results[i].status == FileStatus::Failed) {
            failed = true;
            log << "error: " << files[i].generic_string() << ": " << results[i].message << "\n";
        } else if (results[i].status == FileStatus::Skipped) {
            log << "warning: skipped " << files[i].generic_string() << ": " << results[i].message << "\n";
        }
        entries.push_back(std::move(entry));
    }
    manifest["files"] = std::move(entries);
    return failed ? kPartialFailure : kSuccess;
}

json fit_settings(const SsrConfig& cfg) {
    return {{"bin_count", cfg.bin_count}, {"em_max_iters", cfg.em_max_iters}, {"em_tolerance", cfg.em_tolerance},
            {"sigma_floor", cfg.sigma_floor}, {"em_restarts", cfg.em_restarts}};
}

/// Reuses a cached fit when it was produced with the same fitting settings.
GmmParams cached_fit(const IntensityImage& image, const SsrConfig& cfg, const fs::path& cache_path, bool& cache_hit) {
    cache_hit = false;
    if (fs::exists(cache_path)) {
        try {
            const auto bytes = io::read_file(cache_path);
            const json doc = json::parse(bytes.begin(), bytes.end());
            if (doc.at("fit_settings") == fit_settings(cfg)) {
                cache_hit = true;
                return gmm_from_json(doc.at("gmm"));
            }
        } catch (const std::exception&) {
            // Unreadable cache: refit and overwrite.
        }
    }
    const GmmParams params = fit_gmm(compute_histogram(image, cfg.bin_count), cfg);
    io::write_text_atomic(cache_path, dump({{"fit_settings", fit_settings(cfg)}, {"gmm", to_json(params)}}));
    return params;
}

RegionMasks masks_for(const IntensityImage& image, const std::optional<fs::path>& masks_dir, const fs::path& rel,
                      const SsrConfig& cfg) {
    if (!masks_dir) return baseline_segment(image, cfg);
    const fs::path mask_path = *masks_dir / with_suffix(rel, ".png");
    if (!fs::exists(mask_path)) throw Error(ErrorKind::Io, "missing mask " + mask_path.generic_string());
    RegionMasks masks = io::read_mask_png(mask_path);
    if (masks.height() != image.height() || masks.width() != image.width()) {
        throw Error(ErrorKind::ShapeMismatch, "mask " + mask_path.generic_string() + " does not match image shape");
    }
    return masks;
}

std::string csv_number(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

} // namespace

std::vector<fs::path> list_images(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (ext == ".ssrf" || ext == ".png") files.push_back(fs::relative(entry.path(), dir));
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });
    return files;
}

int run_preprocess(const PreprocessOptions& opts, std::ostream& log) {
    require_directory(opts.input_dir, "input");
    if (!(opts.c > 0.0)) throw Error(ErrorKind::InvalidConfig, "c must be > 0");
    const auto files = list_images(opts.input_dir);
    json manifest = base_manifest("preprocess");
    manifest["args"] = {{"input_dir", opts.input_dir.generic_string()}, {"c", opts.c},
                        {"format", format_name(opts.format)}};
    const int status = process_files(files, opts.jobs, log, manifest, [&](std::size_t, const fs::path& rel) {
        const AmplitudeImage amplitude(io::to_f64(io::read_raster(opts.input_dir / rel)));
        const IntensityImage intensity = log_map(min_max_normalize(amplitude), opts.c);
        const fs::path out_rel = with_suffix(rel, io::extension(opts.format));
        io::write_intensity(opts.output_dir / out_rel, intensity, opts.format);
        FileResult result;
        result.detail["output"] = out_rel.generic_string();
        return result;
    });
    io::write_text_atomic(opts.output_dir / kManifestName, dump(manifest));
    return status;
}

int run_augment(const AugmentOptions& opts, std::ostream& log) {
    require_directory(opts.input_dir, "input");
    opts.config.validate();
    const auto files = list_images(opts.input_dir);
    json manifest = base_manifest("augment");
    manifest["args"] = {{"input_dir", opts.input_dir.generic_string()}, {"seed", opts.seed},
                        {"replicas", opts.replicas}, {"format", format_name(opts.format)}};
    manifest["config"] = to_json(opts.config);
    fs::create_directories(opts.output_dir);
    if (opts.replicas == 0) {
        io::write_text_atomic(opts.output_dir / kManifestName, dump(manifest));
        return kSuccess;
    }
    const int status = process_files(files, opts.jobs, log, manifest, [&](std::size_t index, const fs::path& rel) {
        FileResult result;
        const IntensityImage image = io::read_intensity(opts.input_dir / rel);
        const fs::path cache_rel = with_suffix(rel, ".gmm.json");
        GmmParams params;
        bool cache_hit = false;
        try {
            params = cached_fit(image, opts.config, opts.output_dir / cache_rel, cache_hit);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateHistogram) throw;
            result.status = FileStatus::Skipped;
            result.message = e.what();
            return result;
        }
        result.detail["gmm_cache"] = cache_rel.generic_string();
        json outputs = json::array();
        for (std::size_t r = 0; r < opts.replicas; ++r) {
            char suffix[32];
            std::snprintf(suffix, sizeof suffix, "_r%03zu", r);
            const fs::path out_rel = with_suffix(rel, std::string(suffix) + io::extension(opts.format));
            const fs::path sidecar_rel = with_suffix(rel, std::string(suffix) + ".json");
            AugmentRecord record;
            const IntensityImage out = augment_one(image, params, opts.config, opts.seed, index, r, &record);
            io::write_intensity(opts.output_dir / out_rel, out, opts.format);
            json sidecar = to_json(record);
            sidecar["input"] = rel.generic_string();
            sidecar["output"] = out_rel.generic_string();
            io::write_text_atomic(opts.output_dir / sidecar_rel, dump(sidecar));
            outputs.push_back(out_rel.generic_string());
        }
        result.detail["outputs"] = std::move(outputs);
        return result;
    });
    io::write_text_atomic(opts.output_dir / kManifestName, dump(manifest));
    return status;
}

int run_merge(const MergeOptions& opts, std::ostream& log) {
    require_directory(opts.measured_dir, "measured");
    require_directory(opts.masks_dir, "masks");
    const IntensityImage scene = io::read_intensity(opts.clutter_scene);
    std::optional<RegionMasks> exclusion;
    if (opts.scene_mask) exclusion = io::read_mask_png(*opts.scene_mask);
    const auto files = list_images(opts.measured_dir);
    json manifest = base_manifest("merge");
    manifest["args"] = {{"measured_dir", opts.measured_dir.generic_string()},
                        {"masks_dir", opts.masks_dir.generic_string()},
                        {"clutter_scene", opts.clutter_scene.generic_string()},
                        {"scene_mask", opts.scene_mask ? json(opts.scene_mask->generic_string()) : json(nullptr)},
                        {"seed", opts.seed},
                        {"format", format_name(opts.format)}};
    const int status = process_files(files, opts.jobs, log, manifest, [&](std::size_t index, const fs::path& rel) {
        const IntensityImage image = io::read_intensity(opts.measured_dir / rel);
        const fs::path mask_path = opts.masks_dir / with_suffix(rel, ".png");
        if (!fs::exists(mask_path)) throw Error(ErrorKind::Io, "missing mask " + mask_path.generic_string());
        const RegionMasks masks = io::read_mask_png(mask_path);
        Rng rng(derive_seed(opts.seed, index));
        const ClutterCrop crop =
            random_clutter_crop(scene, image.height(), image.width(), exclusion ? &*exclusion : nullptr, rng);
        const ClutterOffset offset = clutter_region_means(image, crop.patch, masks);
        const IntensityImage merged = merge_clutter(image, masks, crop.patch);
        const fs::path out_rel = with_suffix(rel, io::extension(opts.format));
        io::write_intensity(opts.output_dir / out_rel, merged, opts.format);
        FileResult result;
        result.detail = {{"output", out_rel.generic_string()}, {"crop_row", crop.window.row},
                         {"crop_col", crop.window.col}, {"crop_attempts", crop.attempts}, {"d", offset.d}};
        return result;
    });
    io::write_text_atomic(opts.output_dir / kManifestName, dump(manifest));
    return status;
}

int run_hardseg(const HardsegOptions& opts, std::ostream& log) {
    require_directory(opts.input_dir, "input");
    if (opts.masks_dir) require_directory(*opts.masks_dir, "masks");
    if (opts.variant != 1 && opts.variant != 2) throw Error(ErrorKind::InvalidConfig, "variant must be 1 or 2");
    opts.config.validate();
    const auto files = list_images(opts.input_dir);
    json manifest = base_manifest("hardseg");
    manifest["args"] = {{"input_dir", opts.input_dir.generic_string()},
                        {"masks_dir", opts.masks_dir ? json(opts.masks_dir->generic_string()) : json(nullptr)},
                        {"variant", opts.variant},
                        {"seed", opts.seed},
                        {"replicas", opts.replicas},
                        {"format", format_name(opts.format)}};
    manifest["config"] = to_json(opts.config);
    fs::create_directories(opts.output_dir);
    const int status = process_files(files, opts.jobs, log, manifest, [&](std::size_t index, const fs::path& rel) {
        const IntensityImage image = io::read_intensity(opts.input_dir / rel);
        const RegionMasks masks = masks_for(image, opts.masks_dir, rel, opts.config);
        json outputs = json::array();
        for (std::size_t r = 0; r < opts.replicas; ++r) {
            Rng rng(stream_seed(opts.seed, index, r));
            double delta_mu = 0.0;
            const IntensityImage out = opts.variant == 1
                ? hard_seg_variant1(image, masks, opts.config, rng, &delta_mu)
                : hard_seg_variant2(image, masks, opts.config, rng, &delta_mu);
            char suffix[32];
            std::snprintf(suffix, sizeof suffix, "_r%03zu", r);
            const fs::path out_rel = with_suffix(rel, std::string(suffix) + io::extension(opts.format));
            io::write_intensity(opts.output_dir / out_rel, out, opts.format);
            outputs.push_back({{"output", out_rel.generic_string()}, {"delta_mu", delta_mu}});
        }
        FileResult result;
        result.detail["outputs"] = std::move(outputs);
        return result;
    });
    io::write_text_atomic(opts.output_dir / kManifestName, dump(manifest));
    return status;
}

int run_stats(const StatsOptions& opts, std::ostream& log) {
    require_directory(opts.dir_a, "population A");
    require_directory(opts.dir_b, "population B");
    opts.config.validate();

    struct Row {
        std::string path;
        std::optional<ImageStats> stats;
        std::string error;
    };
    auto collect = [&](const fs::path& dir, const std::optional<fs::path>& masks_dir) {
        const auto files = list_images(dir);
        std::vector<Row> rows(files.size());
        parallel_for(files.size(), opts.jobs, [&](std::size_t i) {
            rows[i].path = (dir / files[i]).generic_string();
            try {
                const IntensityImage image = io::read_intensity(dir / files[i]);
                const GmmParams params = fit_gmm(compute_histogram(image, opts.config.bin_count), opts.config);
                std::optional<RegionMasks> masks;
                if (masks_dir) masks = masks_for(image, masks_dir, files[i], opts.config);
                rows[i].stats = image_stats(image, params, masks ? &*masks : nullptr);
            } catch (const std::exception& e) {
                rows[i].error = e.what();
            }
        });
        return rows;
    };
    const auto rows_a = collect(opts.dir_a, opts.masks_a);
    const auto rows_b = collect(opts.dir_b, opts.masks_b);

    bool failed = false;
    std::vector<ImageStats> stats_a, stats_b;
    const bool with_masks = opts.masks_a || opts.masks_b;
    std::ostringstream csv;
    csv << "path,clutter_mean,clutter_std,global_mean,global_std";
    if (with_masks) csv << ",mask_clutter_mean,mask_clutter_std";
    csv << "\n";
    for (const auto* rows : {&rows_a, &rows_b}) {
        for (const auto& row : *rows) {
            if (!row.stats) {
                failed = true;
                log << "error: " << row.path << ": " << row.error << "\n";
                continue;
            }
            const ImageStats& s = *row.stats;
            (rows == &rows_a ? stats_a : stats_b).push_back(s);
            csv << row.path << "," << csv_number(s.clutter_mean) << "," << csv_number(s.clutter_std) << ","
                << csv_number(s.global_mean) << "," << csv_number(s.global_std);
            if (with_masks) {
                csv << "," << (s.mask_clutter_mean ? csv_number(*s.mask_clutter_mean) : "")
                    << "," << (s.mask_clutter_std ? csv_number(*s.mask_clutter_std) : "");
            }
            csv << "\n";
        }
    }
    const PopulationReport report = population_report(stats_a, stats_b);
    json doc = to_json(report);
    doc["tool"] = kToolVersion;
    doc["population_a"]["dir"] = opts.dir_a.generic_string();
    doc["population_b"]["dir"] = opts.dir_b.generic_string();
    fs::path json_path = opts.output;
    json_path.replace_extension(".json");
    fs::path csv_path = opts.output;
    csv_path.replace_extension(".csv");
    io::write_text_atomic(json_path, dump(doc));
    io::write_text_atomic(csv_path, csv.str());
    return failed ? kPartialFailure : kSuccess;
}

int run_sweep(const SweepOptions& opts, std::ostream& out, std::ostream&) {
    opts.config.validate();
    const IntensityImage image = io::read_intensity(opts.image);
    const Histogram hist = compute_histogram(image, opts.config.bin_count);
    const auto points = nll_kernel_sweep(hist, opts.kernel_counts, opts.config);
    json rows = json::array();
    for (const auto& p : points) rows.push_back({{"kernels", p.kernel_count}, {"nll", p.nll}, {"iterations", p.iterations}});
    const json doc = {{"image", opts.image.generic_string()}, {"bin_count", opts.config.bin_count}, {"sweep", rows}};
    if (opts.output) {
        io::write_text_atomic(*opts.output, dump(doc));
    } else {
        out << dump(doc);
    }
    return kSuccess;
}

int run_replay(const fs::path& manifest_path, std::optional<fs::path> output_override, unsigned jobs,
               std::ostream& log) {
    const auto bytes = io::read_file(manifest_path);
    json manifest;
    try {
        manifest = json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, manifest_path.string() + ": " + e.what());
    }
    const fs::path output_dir = output_override ? *output_override : manifest_path.parent_path();
    try {
        const std::string command = manifest.at("command").get<std::string>();
        const json& args = manifest.at("args");
        const auto format = io::parse_format(args.at("format").get<std::string>());
        auto optional_path = [&](const char* key) -> std::optional<fs::path> {
            if (!args.contains(key) || args.at(key).is_null()) return std::nullopt;
            return fs::path(args.at(key).get<std::string>());
        };
        if (command == "preprocess") {
            return run_preprocess({args.at("input_dir").get<std::string>(), output_dir, args.at("c").get<double>(),
                                   format, jobs},
                                  log);
        }
        if (command == "augment") {
            AugmentOptions opts;
            opts.input_dir = args.at("input_dir").get<std::string>();
            opts.output_dir = output_dir;
            opts.config = config_from_json(manifest.at("config"));
            opts.seed = args.at("seed").get<std::uint64_t>();
            opts.replicas = args.at("replicas").get<std::size_t>();
            opts.format = format;
            opts.jobs = jobs;
            return run_augment(opts, log);
        }
        if (command == "merge") {
            MergeOptions opts;
            opts.measured_dir = args.at("measured_dir").get<std::string>();
            opts.masks_dir = args.at("masks_dir").get<std::string>();
            opts.clutter_scene = args.at("clutter_scene").get<std::string>();
            opts.scene_mask = optional_path("scene_mask");
            opts.output_dir = output_dir;
            opts.seed = args.at("seed").get<std::uint64_t>();
            opts.format = format;
            opts.jobs = jobs;
            return run_merge(opts, log);
        }
        if (command == "hardseg") {
            HardsegOptions opts;
            opts.input_dir = args.at("input_dir").get<std::string>();
            opts.masks_dir = optional_path("masks_dir");
            opts.output_dir = output_dir;
            opts.variant = args.at("variant").get<int>();
            opts.config = config_from_json(manifest.at("config"));
            opts.seed = args.at("seed").get<std::uint64_t>();
            opts.replicas = args.at("replicas").get<std::size_t>();
            opts.format = format;
            opts.jobs = jobs;
            return run_hardseg(opts, log);
        }
        throw Error(ErrorKind::Format, "manifest command '" + command + "' cannot be replayed");
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, manifest_path.string() + ": " + e.what());
    }
}

} // namespace ssr::cli
