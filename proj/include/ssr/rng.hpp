#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace ssr {

/// SplitMix64 finalizer; also used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stable per-stream seed for (base_seed, index). Streams never depend on
/// scheduling or batch order, only on this pair.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) noexcept {
    return mix64(mix64(base_seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// xoshiro256** seeded through SplitMix64. Normal deviates use the Marsaglia
/// polar method so streams are identical across standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;
    static constexpr std::string_view kAlgorithm = "xoshiro256**/splitmix64-derive/marsaglia-polar";

    explicit Rng(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept;

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, bound). Lemire's rejection keeps it unbiased.
    std::uint64_t below(std::uint64_t bound) noexcept;
    double normal() noexcept;
    double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace ssr
