#pragma once

#include <cmath>
#include <cstdint>

namespace bsnn {

// Counter-based pseudo-random numbers. Every draw is a pure function of the
// key words, so results do not depend on call order or thread count.
namespace rng {

constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t key(std::uint64_t a, std::uint64_t b = 0,
                            std::uint64_t c = 0, std::uint64_t d = 0) {
    std::uint64_t h = mix(a);
    h = mix(h ^ b);
    h = mix(h ^ c);
    h = mix(h ^ d);
    return h;
}

// Uniform in [0,1) with 24 mantissa bits.
inline float uniform(std::uint64_t k) {
    return static_cast<float>(k >> 40) * (1.0f / 16777216.0f);
}

inline double uniform_double(std::uint64_t k) {
    return static_cast<double>(k >> 11) * (1.0 / 9007199254740992.0);
}

// Standard normal via Box-Muller; two fresh keys per draw.
inline float normal(std::uint64_t k) {
    double u1 = uniform_double(mix(k));
    double u2 = uniform_double(mix(k ^ 0xda3e39cb94b95bdbull));
    if (u1 < 1e-12) u1 = 1e-12;
    return static_cast<float>(std::sqrt(-2.0 * std::log(u1)) *
                              std::cos(6.283185307179586 * u2));
}

// Uniform integer in [0, n).
inline std::uint64_t below(std::uint64_t k, std::uint64_t n) {
    return k % n;
}

}  // namespace rng

}  // namespace bsnn
