#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace spinglass {

// SplitMix64 finalizer. Used both as a seed scrambler and as the documented
// sub-stream derivation below.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// The one seed-mixing function of the project. Every independent unit of work
// (replicate, cell, sub-task) draws its seed as mix_seed(parent_seed, stream)
// so that no two units ever share an RNG stream and results do not depend on
// scheduling.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ (0x9E3779B97F4A7C15ull * (stream + 1)));
}

// mt19937_64 plus the small set of variate helpers used across the project.
// The helpers are hand-rolled (not std::*_distribution) so the consumed
// stream is fully specified by this header.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, bound). bound >= 1.
    std::uint64_t uniform_below(std::uint64_t bound) {
        const std::uint64_t reject_below = (-bound) % bound;  // 2^64 mod bound
        std::uint64_t x;
        do {
            x = engine_();
        } while (x < reject_below);
        return x % bound;
    }

    int uniform_int(int lo, int hi) {  // inclusive range
        return lo + static_cast<int>(uniform_below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    // Standard normal via Box-Muller; the cosine/sine pair is cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    int rademacher() { return (engine_() >> 63) ? 1 : -1; }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace spinglass
