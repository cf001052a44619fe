#pragma once

#include <cstdint>

namespace apfree {

// Counter-based deterministic generator. Every draw is a pure function of
// (seed, stream, counter), so parallel consumers can each take their own
// stream id and stay reproducible regardless of scheduling.
//
// We avoid <random> distributions on purpose: their output is
// implementation-defined, and bit-reproducibility across platforms is part
// of the contract here.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(mix(seed + 0x9e3779b97f4a7c15ull) ^
                 mix(stream + 0xbf58476d1ce4e5b9ull))) {}

  std::uint64_t next_u64() { return mix(key_ ^ (0x94d049bb133111ebull * ++counter_)); }

  // Uniform in [0,1) with 53 bits of mantissa.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, m), unbiased by rejection.
  std::uint64_t next_below(std::uint64_t m) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % m;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % m;
  }

  bool next_bernoulli(double prob) { return next_double() < prob; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace apfree
