#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "treemc/kernel.hpp"
#include "treemc/tree.hpp"

namespace treemc {

/// One realisation of a branching Markov process on a fixed tree. Holds a
/// pointer to the tree, which must outlive the sample.
class ProcessSample {
 public:
  ProcessSample(const ArenaTree& tree, std::vector<std::size_t> values) : tree_(&tree), values_(std::move(values)) {}

  const ArenaTree& tree() const { return *tree_; }
  const std::vector<std::size_t>& values() const { return values_; }
  std::size_t value(VertexId v) const { return values_.at(v); }

 private:
  const ArenaTree* tree_;
  std::vector<std::size_t> values_;
};

/// Inverse-CDF tables for a kernel and an initial law.
class ProcessSampler {
 public:
  ProcessSampler(const FiniteKernel& q, const Measure& nu);

  /// Root drawn from nu, every other vertex from its parent's kernel row.
  /// Vertex v consumes the v-th output of a counter stream keyed by `seed`,
  /// so the result does not depend on traversal order.
  ProcessSample sample(const ArenaTree& t, std::uint64_t seed) const;

  /// As sample(), writing into a caller-owned buffer.
  void sample_into(const ArenaTree& t, std::uint64_t seed, std::vector<std::size_t>& values) const;

 private:
  static std::size_t draw(const std::vector<double>& cdf, double u);
  std::vector<double> initial_cdf_;
  std::vector<std::vector<double>> row_cdf_;
};

ProcessSample sample_process(const ArenaTree& t, const FiniteKernel& q, const Measure& nu, std::uint64_t seed);

/// M_A(f) = sum over A of f(X_u). Throws std::invalid_argument on empty A.
double empirical_sum(const ProcessSample& s, std::span<const VertexId> subset, const StateFunction& f);

/// |A|^{-1} M_A(f).
double empirical_average(const ProcessSample& s, std::span<const VertexId> subset, const StateFunction& f);

struct L2Estimate {
  double mean_squared_error = 0.0;  // mean of (Mbar_A(f) - c_f)^2
  double standard_error = 0.0;      // jackknife
  double c_f = 0.0;
  std::size_t replicates = 0;
};

/// Monte-Carlo estimate of E[(Mbar_A(f) - c_f)^2] over independent process
/// samples; replicate r uses seed derive_seed(seed, r). The result does not
/// depend on the thread count.
L2Estimate l2_error_mc(const ArenaTree& t, const FiniteKernel& q, const Measure& nu, const StateFunction& f,
                       std::span<const VertexId> subset, std::size_t replicates, std::uint64_t seed, double c_f,
                       int threads = 0);

/// Same, with c_f = <mu, f> for the unique invariant measure of Q. Throws
/// ContractError if that measure is not unique.
L2Estimate l2_error_mc(const ArenaTree& t, const FiniteKernel& q, const Measure& nu, const StateFunction& f,
                       std::span<const VertexId> subset, std::size_t replicates, std::uint64_t seed, int threads = 0);

/// Jackknife standard error of the mean of `values`.
double jackknife_standard_error(const std::vector<double>& values);

}  // namespace treemc
