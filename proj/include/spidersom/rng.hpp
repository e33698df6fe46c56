#pragma once

#include <cstdint>
#include <random>

namespace spidersom {

/**
 * @brief Seeded generator with platform-independent draws.
 *
 * std::mt19937_64 output is fixed by the standard, but the standard
 * distributions are not, so the mappings to [0,1) and [0,n) live here.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound), rejection-sampled (no modulo bias).
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound);
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % bound;
    }

private:
    std::mt19937_64 engine_;
};

/// Independent streams derived from the single reproducibility seed.
enum class SeedStream : std::uint64_t {
    init = 0,
    shuffle = 1,
    sampling = 2,
    jitter = 3,
};

constexpr std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream) {
    return seed + static_cast<std::uint64_t>(stream) * 0x9E3779B97F4A7C15ull;
}

}  // namespace spidersom
