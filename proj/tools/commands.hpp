#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssr/config.hpp"
#include "ssr/io.hpp"

namespace ssr::cli {

inline constexpr const char* kToolVersion = "ssr 1.0.0";

enum ExitCode : int { kSuccess = 0, kPartialFailure = 1, kUsage = 2 };

struct PreprocessOptions {
    std::filesystem::path input_dir;
    std::filesystem::path output_dir;
    double c = 1000.0;
    io::ImageFormat format = io::ImageFormat::Ssrf;
    unsigned jobs = 1;
};

struct AugmentOptions {
    std::filesystem::path input_dir;
    std::filesystem::path output_dir;
    SsrConfig config;
    std::uint64_t seed = 0;
    std::size_t replicas = 1;
    io::ImageFormat format = io::ImageFormat::Ssrf;
    unsigned jobs = 1;
};

struct MergeOptions {
    std::filesystem::path measured_dir;
    std::filesystem::path masks_dir;
    std::filesystem::path clutter_scene;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> scene_mask;
    std::uint64_t seed = 0;
    io::ImageFormat format = io::ImageFormat::Ssrf;
    unsigned jobs = 1;
};

struct HardsegOptions {
    std::filesystem::path input_dir;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> masks_dir;
    int variant = 1;
    SsrConfig config;
    std::uint64_t seed = 0;
    std::size_t replicas = 1;
    io::ImageFormat format = io::ImageFormat::Ssrf;
    unsigned jobs = 1;
};

struct StatsOptions {
    std::filesystem::path dir_a;
    std::filesystem::path dir_b;
    std::filesystem::path output;
    std::optional<std::filesystem::path> masks_a;
    std::optional<std::filesystem::path> masks_b;
    SsrConfig config;
    unsigned jobs = 1;
};

struct SweepOptions {
    std::filesystem::path image;
    std::vector<std::size_t> kernel_counts{1, 2, 3, 4, 5};
    std::optional<std::filesystem::path> output;
    SsrConfig config;
};

/// Each command writes its outputs plus `manifest.json` (where applicable)
/// and returns an ExitCode. Diagnostics go to `log`.
int run_preprocess(const PreprocessOptions& opts, std::ostream& log);
int run_augment(const AugmentOptions& opts, std::ostream& log);
int run_merge(const MergeOptions& opts, std::ostream& log);
int run_hardseg(const HardsegOptions& opts, std::ostream& log);
int run_stats(const StatsOptions& opts, std::ostream& log);
int run_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& log);

/// Re-executes the command recorded in a manifest, writing to the recorded
/// output directory unless `output_override` is given.
int run_replay(const std::filesystem::path& manifest, std::optional<std::filesystem::path> output_override,
               unsigned jobs, std::ostream& log);

/// Sorted relative paths of every .ssrf / .png file below `dir`.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// Full argv entry point (argv[0] is the program name).
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ssr::cli
