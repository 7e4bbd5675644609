#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "treemc/generators.hpp"
#include "treemc/rng.hpp"
#include "treemc/tree.hpp"

namespace treemc {

/// Finite-support offspring law on the nonnegative integers.
class OffspringDistribution {
 public:
  /// Probabilities must be nonnegative and sum to 1 within 1e-12.
  explicit OffspringDistribution(std::map<std::size_t, double> pmf);

  const std::map<std::size_t, double>& pmf() const { return pmf_; }
  double mean() const { return mean_; }
  double second_moment() const { return second_moment_; }

  /// Probability generating function g(s) = sum_k p_k s^k.
  double pgf(double s) const;

  std::size_t sample(Rng& rng) const;

 private:
  std::map<std::size_t, double> pmf_;
  std::vector<std::size_t> support_;
  std::vector<double> cdf_;
  double mean_ = 0.0;
  double second_moment_ = 0.0;
};

/// Smallest fixed point of the pgf on [0, 1], by monotone iteration from 0.
double extinction_probability(const OffspringDistribution& off);

/// P(Z_n > 0) = 1 - g^{(n)}(0).
double survival_probability(const OffspringDistribution& off, std::size_t horizon);

struct GwSample {
  ArenaTree tree;
  std::size_t horizon = 0;
  /// survivor[v] is true iff v has a descendant (possibly itself) at the horizon.
  std::vector<bool> survivor;
  /// Number of rejected trees before acceptance.
  std::size_t retries = 0;
};

inline constexpr std::size_t kDefaultGwRetryCap = 1'000'000;

/// One Galton-Watson tree truncated at `horizon` (may die out early).
ArenaTree gw_tree(const OffspringDistribution& off, std::size_t horizon, Rng& rng,
                  std::size_t vertex_cap = kDefaultVertexCap);

/// Galton-Watson tree truncated at `horizon`, conditioned on generation
/// `horizon` being nonempty, by rejection. Deterministic given the seed.
/// Throws SamplingError past `retry_cap` rejections and std::invalid_argument
/// when the mean is not above 1.
GwSample gw_conditioned(const OffspringDistribution& off, std::size_t horizon, std::uint64_t seed,
                        std::size_t retry_cap = kDefaultGwRetryCap, std::size_t vertex_cap = kDefaultVertexCap);

/// Post-order survivor marking for a tree truncated at `horizon`.
std::vector<bool> survivor_marks(const ArenaTree& t, std::size_t horizon);

}  // namespace treemc
