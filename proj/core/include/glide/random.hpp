// Seeded random source with platform-independent distributions. The standard
// <random> distributions are implementation-defined, so results would differ
// between standard libraries; only the engine is taken from the stdlib.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "glide/geometry.hpp"

namespace glide {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Deterministically derives an independent stream from (seed, salt).
    [[nodiscard]] static Rng derive(std::uint64_t seed, std::uint64_t salt) {
        return Rng(mix(seed ^ mix(salt + 0x9e3779b97f4a7c15ULL)));
    }

    [[nodiscard]] std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    [[nodiscard]] double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    [[nodiscard]] double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi].
    [[nodiscard]] std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(engine_());
        // reject the tail that would bias the modulo
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t r = engine_();
        while (r >= limit) r = engine_();
        return lo + static_cast<std::int64_t>(r % span);
    }

    [[nodiscard]] bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller; the spare deviate is cached.
    [[nodiscard]] double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        has_spare_ = true;
        return r * std::cos(kTwoPi * u2);
    }

    [[nodiscard]] double normal(double mean, double sigma) { return mean + sigma * normal(); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        // splitmix64 finalizer
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
    double spare_{0.0};
    bool has_spare_{false};
};

}  // namespace glide
