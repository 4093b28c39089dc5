#pragma once

#include <cmath>
#include <cstdint>

namespace hetfx {

// Counter-free splittable PRNG.
//
// Every consumer derives an independent substream from (master seed,
// stream index) so that work scheduled across threads draws identical
// numbers regardless of execution order. The generator is SplitMix64
// (Steele, Lea & Flood 2014): full 64-bit period per stream, passes
// BigCrush, and — unlike <random> distributions — its output is fully
// specified here, so results are reproducible across standard libraries.
class Rng {
  public:
    // Substream constructor: mixes the master seed and stream id through
    // two Stafford-mix rounds so related (seed, stream) pairs decorrelate.
    Rng(std::uint64_t seed, std::uint64_t stream) {
        state_ = mix64(seed ^ 0x9E3779B97F4A7C15ULL);
        state_ = mix64(state_ + 0xBF58476D1CE4E5B9ULL * (stream + 1));
        has_spare_ = false;
        spare_ = 0.0;
    }

    explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform double in (0, 1]: avoids log(0) in Box-Muller.
    double uniform_pos() {
        double u = uniform();
        return u > 0.0 ? u : 0x1.0p-53;
    }

    // Standard normal via Box-Muller; generates pairs, caches the spare.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform_pos();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // +1 or -1 with equal probability.
    double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

    // Two-point distribution with mean 0, variance 1 and third moment 1:
    // takes value (1-sqrt(5))/2 with probability (sqrt(5)+1)/(2 sqrt(5)),
    // else (1+sqrt(5))/2.
    double mammen() {
        constexpr double lo = -0.61803398874989484820458683436564;   // (1-sqrt(5))/2
        constexpr double hi = 1.61803398874989484820458683436564;    // (1+sqrt(5))/2
        constexpr double p_lo = 0.72360679774997896964091736687748;  // (sqrt(5)+1)/(2 sqrt(5))
        return uniform() < p_lo ? lo : hi;
    }

  private:
    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double spare_;
    bool has_spare_;
};

}  // namespace hetfx
