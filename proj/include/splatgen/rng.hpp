#pragma once

#include "splatgen/common.hpp"

#include <cstdint>

namespace splatgen {

// Deterministic PRNG used everywhere randomness is needed. Hand-rolled on
// purpose: std::uniform_*_distribution output is implementation defined, and
// we promise bit-identical outputs for a fixed seed.
//
// The generator is splitmix64; independent streams are derived by hashing
// (seed, stream, index) through the same mixer, so any (scene, purpose) pair
// can be re-created in isolation without consuming a shared sequence.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi], inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        if (hi <= lo) return lo;
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        // Rejection sampling keeps the draw unbiased.
        uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return lo + static_cast<int64_t>(x % span);
    }

    // Standard normal via Box-Muller (the second value is discarded so the
    // state advance per call is fixed).
    double normal() {
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Uniform rotation: four independent normals, normalized.
    Quat random_rotation() {
        while (true) {
            Quat q(normal(), normal(), normal(), normal());
            double n = q.norm();
            if (n > 1e-12) {
                q.coeffs() /= n;
                return q;
            }
        }
    }

    Vec3 unit_vector() {
        while (true) {
            Vec3 v(normal(), normal(), normal());
            double n = v.norm();
            if (n > 1e-12) return v / n;
        }
    }

private:
    uint64_t state_;
};

inline uint64_t mix_u64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Counter-based stream derivation: the returned generator depends only on the
// arguments, never on how many draws other streams made.
inline Rng derive_rng(uint64_t seed, uint64_t stream, uint64_t index = 0) {
    uint64_t h = mix_u64(seed + 0x9E3779B97F4A7C15ull);
    h = mix_u64(h ^ (stream + 0xD1B54A32D192ED03ull));
    h = mix_u64(h ^ (index + 0x8CB92BA72F3D8DD7ull));
    return Rng(h);
}

} // namespace splatgen
