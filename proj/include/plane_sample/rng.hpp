#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ps {

// Deterministic RNG toolkit. The engine is std::mt19937_64 (bit-exact across
// platforms); all variate transforms are implemented here because the standard
// library's distribution objects are implementation-defined and would break
// byte-identical reproducibility contracts.
using Rng = std::mt19937_64;

namespace detail {
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// i-th element of the splitmix64 stream seeded at `base`. Used to derive
// per-sample / per-step / per-run seeds that are decorrelated from each other.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return detail::splitmix64_mix(base + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). n must be > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    // Rejection sampling on the top bits keeps the draw exactly uniform.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % n;
    }
}

// Standard normal via Box-Muller. One variate per call; the sine partner is
// discarded so the draw count per call stays fixed.
inline double standard_normal(Rng& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// |N(0, scale^2)| draw.
inline double halfnormal(Rng& rng, double scale) {
    return std::abs(standard_normal(rng)) * scale;
}

// Poisson draw via Knuth's multiplication method, chunked so the e^-lambda
// threshold never underflows for large rates.
inline std::uint64_t poisson(Rng& rng, double lambda) {
    if (!(lambda > 0.0)) return 0;
    std::uint64_t k = 0;
    while (lambda > 0.0) {
        const double chunk = lambda < 500.0 ? lambda : 500.0;
        lambda -= chunk;
        const double limit = std::exp(-chunk);
        double p = uniform01(rng);
        while (p > limit) {
            ++k;
            p *= uniform01(rng);
        }
    }
    return k;
}

}  // namespace ps
