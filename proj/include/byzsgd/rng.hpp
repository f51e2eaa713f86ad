#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace byzsgd {

// Deterministic random streams. Experiments key every draw on
// (seed, round, worker), so a run replays bit-identically. We use our own
// generator and distributions instead of <random> because the standard
// distributions are implementation-defined.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// xoshiro256** seeded through splitmix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
    }

    /// Derives an independent stream keyed by up to three indices.
    static Rng stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                      std::uint64_t c = 0) {
        std::uint64_t s = seed;
        std::uint64_t h = splitmix64(s);
        s ^= a;
        h ^= splitmix64(s);
        s ^= b;
        h ^= splitmix64(s);
        s ^= c;
        h ^= splitmix64(s);
        return Rng(h);
    }

    std::uint64_t next() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n) {
        // multiply-shift; bias is negligible for the n used here
        return static_cast<std::size_t>(
            (static_cast<__uint128_t>(next()) * static_cast<__uint128_t>(n)) >> 64);
    }

    /// Standard normal via Box-Muller (the second deviate is discarded, so
    /// the stream position is independent of past draws).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::array<std::uint64_t, 4> state_{};
};

}  // namespace byzsgd
