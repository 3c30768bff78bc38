#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "vime/linalg.hpp"

namespace vime {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent generator for (seed, stream). Streams keep the policy rollouts,
// BNN training, and evaluation draws decoupled so that disabling one phase
// never perturbs another.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x51ed2701)));
}

inline double uniform(Rng& rng, double lo, double hi) {
    // 53-bit mantissa draw in [0, 1)
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

// Box-Muller; stateless by construction so call sequences stay reproducible.
inline double normal(Rng& rng) {
    double u1 = uniform(rng, 0.0, 1.0);
    double u2 = uniform(rng, 0.0, 1.0);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline Vec normal_vec(Rng& rng, std::size_t n) {
    Vec out(n);
    for (auto& v : out) v = normal(rng);
    return out;
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    // n is tiny compared to 2^64; modulo bias is negligible but we reject anyway.
    std::uint64_t limit = ~0ULL - (~0ULL % n);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

}  // namespace vime
