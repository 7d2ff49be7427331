#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace qsdc {

/// Seedable random source used everywhere in the simulator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Floating-point and bounded-integer draws are derived here rather
/// than through <random> distributions, whose algorithms are left to the
/// library implementation; this keeps replays bit-identical across toolchains.
///
/// Per-session streams are derived with SplitMix64 from (seed, index, stream).
class Rng {
public:
    using result_type = std::uint64_t;

    static constexpr const char* algorithm_name = "mt19937_64/splitmix64-derive";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    static constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index,
                                               std::uint64_t stream = 0) noexcept
    {
        return splitmix64(splitmix64(splitmix64(seed) ^ index) ^ (stream * 0xD1B54A32D192ED03ULL));
    }

    static Rng derive(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0)
    {
        return Rng(derive_seed(seed, index, stream));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n)
    {
        // Rejection on the top of the range removes modulo bias.
        const std::uint64_t limit = max() - (max() % n + 1) % n;
        std::uint64_t x = engine_();
        while (x > limit)
            x = engine_();
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint8_t bit() { return static_cast<std::uint8_t>(engine_() >> 63); }

private:
    std::mt19937_64 engine_;
};

} // namespace qsdc
