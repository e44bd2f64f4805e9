#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace mathsmith {

// Seedable random stream with portable draws. The engine is std::mt19937_64,
// whose raw 64-bit output sequence is fixed by the standard; the derived
// draws below are defined here (not via std::*_distribution, which may vary
// between standard libraries), so a seed replays bit-identically everywhere.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform integer in [0, n). Rejection-sampled multiply-shift (Lemire).
    uint64_t below(uint64_t n);

    // Uniform integer in [lo, hi] inclusive.
    uint64_t between(uint64_t lo, uint64_t hi) { return lo + below(hi - lo + 1); }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Index draw from a probability vector (entries sum to ~1).
    size_t pick(std::span<const double> probabilities);

  private:
    std::mt19937_64 engine_;
};

// SplitMix64 output for the k-th element of the stream seeded by `seed`.
// O(1) random access; used to derive independent per-task seeds.
uint64_t splitmix64_at(uint64_t seed, uint64_t k);

} // namespace mathsmith
