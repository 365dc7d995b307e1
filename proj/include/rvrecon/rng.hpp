#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace rvrecon {

// Draws below avoid std::uniform_real_distribution and friends on purpose:
// the raw mt19937_64 stream is pinned by the standard, the distributions are
// not, and seeded runs must reproduce bit-exactly everywhere.

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);  // 53-bit mantissa
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Box-Muller, cosine branch only.
inline double normal01(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Independent named substream of one master seed.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name) {
    const std::uint64_t mix = fnv1a64(name) ^ (seed * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull);
    return std::mt19937_64(mix);
}

}  // namespace rvrecon
