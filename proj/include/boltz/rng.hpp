#pragma once

#include <cmath>
#include <cstdint>

#include "boltz/vec.hpp"

namespace boltz {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// xoshiro256++, seeded through splitmix64. Self-contained so that streams are
// byte-reproducible across standard libraries and platforms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    // Stream derivation: one root seed, one stable task id, one item index.
    static Rng derived(std::uint64_t root, std::uint64_t task_id,
                       std::uint64_t index = 0) {
        std::uint64_t sm = root;
        std::uint64_t a = splitmix64(sm);
        sm = a ^ (task_id * 0xD1B54A32D192ED03ull);
        std::uint64_t b = splitmix64(sm);
        sm = b ^ ((index + 1) * 0x9E3779B97F4A7C15ull);
        return Rng(splitmix64(sm));
    }

    std::uint64_t u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1).
    double uniform() { return double(u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return u64() % n; }

    // Standard normal via polar Box-Muller (no cached spare: stream position
    // stays a pure function of call count for the vector sampler below).
    double normal() {
        double u1, u2, r2;
        do {
            u1 = 2.0 * uniform() - 1.0;
            u2 = 2.0 * uniform() - 1.0;
            r2 = u1 * u1 + u2 * u2;
        } while (r2 >= 1.0 || r2 == 0.0);
        return u1 * std::sqrt(-2.0 * std::log(r2) / r2);
    }

    Vec3 normal3() { return {normal(), normal(), normal()}; }

    Vec3 unit_vector() {
        double c = uniform(-1.0, 1.0);
        double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        double ph = uniform(0.0, 2.0 * M_PI);
        return {s * std::cos(ph), s * std::sin(ph), c};
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

}  // namespace boltz
