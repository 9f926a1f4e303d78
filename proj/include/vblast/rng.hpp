#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

#include "vblast/types.hpp"

namespace vblast {

// Reproducibility contract: every Monte-Carlo trial draws from its own
// logical stream keyed by (seed, stream_id), so results are identical
// no matter how trials are partitioned across workers.

inline uint64_t splitmix64_next(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ seeded from a SplitMix64 hash of (seed, stream_id).
class RandomStream {
  public:
    RandomStream(uint64_t seed, uint64_t stream_id) {
        uint64_t h = seed;
        (void)splitmix64_next(h);
        h ^= 0xD1B54A32D192ED03ULL * (stream_id + 1);
        s_[0] = splitmix64_next(h);
        s_[1] = splitmix64_next(h);
        s_[2] = splitmix64_next(h);
        s_[3] = splitmix64_next(h);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on (0, 1].
    double next_uniform() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Box-Muller pair of independent N(0, 1).
    std::pair<double, double> next_normal_pair() {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(th), r * std::sin(th)};
    }

    /// Circularly-symmetric complex Gaussian CN(0, 1): E|z|^2 = 1.
    cplx next_cgauss() {
        auto [a, b] = next_normal_pair();
        constexpr double inv_sqrt2 = 0.7071067811865475244;
        return {a * inv_sqrt2, b * inv_sqrt2};
    }

    int next_bit() { return static_cast<int>(next_u64() >> 63); }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

}  // namespace vblast
