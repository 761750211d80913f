#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace drnav {

using Rng = std::mt19937_64;

// splitmix64 finalizer, used to mix seed material into well-separated streams.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Independent stream for (base seed, stream id, step). Streams derived this
// way never share state, so per-pedestrian forecasts and per-episode runs
// can execute in parallel without coupling their draws.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t step = 0) {
    std::uint64_t s = mix_seed(seed ^ mix_seed(stream ^ mix_seed(step)));
    return Rng(s);
}

// Uniform double in [0, 1), 53-bit, independent of library distributions so
// that draws are identical on every platform.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// One pair of independent standard normals (Box-Muller, no cached state).
inline Eigen::Vector2d gaussian2(Rng& rng) {
    double u1 = 1.0 - uniform01(rng);  // (0, 1]
    double u2 = uniform01(rng);
    double rad = std::sqrt(-2.0 * std::log(u1));
    double ang = 2.0 * M_PI * u2;
    return {rad * std::cos(ang), rad * std::sin(ang)};
}

inline double gaussian1(Rng& rng) { return gaussian2(rng).x(); }

}  // namespace drnav
