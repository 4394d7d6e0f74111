#pragma once

#include <cstdint>

namespace fplab {

/// Counter-based generator: draw k of seed S is the k-th output of SplitMix64
/// started at state S, i.e. mix64(S + (k + 1) * 0x9E3779B97F4A7C15), where
/// mix64 is the Stafford variant-13 finalizer used by SplitMix64. Any draw
/// can be computed without producing the ones before it, so streams are
/// reproducible across implementations and partitionings.
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit constexpr CounterRng(std::uint64_t seed) : seed_(seed) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t bits(std::uint64_t counter) const { return mix64(seed_ + (counter + 1) * kGolden); }

  /// Uniform double in [0, 1) from the top 53 bits.
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }
  constexpr double uniform(std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform(counter);
  }

  /// Independent substream keyed by `stream` (e.g. one per data set).
  constexpr CounterRng substream(std::uint64_t stream) const { return CounterRng(mix64(seed_ ^ mix64(stream + kGolden))); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace fplab
