#pragma once

#include <cstdint>

namespace efla {

// SplitMix64 (Steele, Lea, Flood 2014). Chosen over std::mt19937 +
// std::normal_distribution because the latter's output sequence is not
// pinned by the standard; this generator produces identical streams on
// every platform, which the CSV determinism guarantees depend on.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) with 53 random bits: u64 >> 11 scaled by 2^-53.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo,hi).
    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Standard normal via Box-Muller. log(0) is avoided by flipping u1
    // to the half-open interval (0,1].
    double next_gaussian();

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Per-trial substream: hashes (seed, index) through one SplitMix64 step
// each so that trial k's stream is uncorrelated with trial k+1's and
// independent of how many draws earlier trials consumed.
SplitMix64 derive_stream(std::uint64_t seed, std::uint64_t index);

}  // namespace efla
