#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "stopflow/path_power.hpp"

namespace stopflow {

/// SplitMix64. Small, fully specified, so streams are identical on every platform.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix(state_ += 0x9E3779B97F4A7C15ULL); }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Independent stream for trial `index` under `master_seed`: seed xor splitmix(index).
inline SplitMix64 trial_stream(std::uint64_t master_seed, std::uint64_t index) noexcept {
    return SplitMix64(master_seed ^ SplitMix64::mix(index + 0x9E3779B97F4A7C15ULL));
}

/// Uniform double in [0, 1) with 53 random bits.
template <class Rng>
double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by rejection; bound > 0.
template <class Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

/// Uniformly random arrival order of positions 1..n (Fisher-Yates).
template <class Rng>
std::vector<Position> random_arrivals(int n, Rng& rng) {
    std::vector<Position> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 1);
    for (std::size_t i = perm.size(); i > 1; --i) {
        const auto j = uniform_below(rng, i);
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

/// Number of tails in n flips of a coin that lands tails with probability p.
template <class Rng>
int binomial_flips(int n, double p, Rng& rng) {
    int tails = 0;
    for (int i = 0; i < n; ++i)
        if (uniform01(rng) < p) ++tails;
    return tails;
}

} // namespace stopflow
