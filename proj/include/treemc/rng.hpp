#pragma once

#include <cstdint>
#include <random>

namespace treemc {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based stream: the i-th output of a SplitMix64 generator seeded
/// with `seed`. Used to derive replicate seeds and per-vertex draws so that
/// results do not depend on evaluation order or thread count.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64_mix(seed + (counter + 1) * kGoldenGamma);
}

/// Maps 64 random bits to a double in [0, 1) using the top 53 bits.
inline constexpr double to_unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Sequential generator. std::mt19937_64 output is fixed by the standard;
/// only raw bits are consumed so results are identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return to_unit_interval(engine_()); }
  std::uint64_t bits() { return engine_(); }

  /// Uniform integer in [0, n). Rejection-free multiply-shift; bias is
  /// below 2^-53 for the sizes used here.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace treemc
