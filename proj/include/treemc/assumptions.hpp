#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treemc/galton_watson.hpp"
#include "treemc/profile.hpp"
#include "treemc/tree.hpp"

namespace treemc {

/// Laws of d(U, V) and h(U ^ V) for U, V independent and uniform on A.
struct PairStatistics {
  std::size_t subset_size = 0;
  std::map<std::size_t, double> distance_pmf;
  std::map<std::size_t, double> ancestor_height_pmf;
  /// E[h(U)]
  double mean_height = 0.0;
  std::size_t min_height = 0;
  std::size_t max_height = 0;

  /// P(d(U, V) <= k)
  double distance_cdf(std::size_t k) const;
  /// P(h(U ^ V) > k)
  double ancestor_tail(std::size_t k) const;
  double mean_distance() const;
  double mean_ancestor_height() const;
};

/// Exact statistics from one ancestral-profile pass.
PairStatistics pair_statistics(const ArenaTree& t, std::span<const VertexId> subset);
PairStatistics pair_statistics(const AncestralProfile& profile);

/// Knobs for turning finite sequences into limit verdicts.
struct VerdictThresholds {
  /// P_n(d <= k) must end below this, for every k <= k_max.
  double geometric_epsilon = 0.05;
  std::size_t k_max = 2;
  /// Target for the tail P(h(U ^ V) > k).
  double ancestral_epsilon = 0.1;
  /// Largest k tried; by default one less than the smallest max-height over
  /// the last third of the sequence, so k cannot grow with the subsets.
  std::optional<std::size_t> ancestral_k_cap;
};

struct GeometricCheck {
  /// table[k][i] = P_i(d <= k) for sequence element i.
  std::vector<std::vector<double>> table;
  std::vector<bool> pass_by_k;
  bool pass = false;
};

/// PASS for k when the last value is below epsilon and the last third of
/// the sequence is non-increasing. Requires at least 3 elements.
GeometricCheck geometric_check(const std::vector<PairStatistics>& sequence, std::size_t k_max, double epsilon);

struct AncestralCheck {
  bool pass = false;
  /// Smallest k meeting the target, when one exists below the cap.
  std::optional<std::size_t> k;
  std::size_t k_cap = 0;
  /// Max over the last third of P(h > k), for each k tried.
  std::vector<double> limsup_proxy;
};

AncestralCheck ancestral_check(const std::vector<PairStatistics>& sequence, double epsilon,
                               std::optional<std::size_t> k_cap = std::nullopt);

/// |G_{(n-ell)+} u ... u G_n| / |T_n|.
double last_generation_mass(const ArenaTree& t, std::size_t n, std::size_t ell);

/// Size of a ball of radius k when every vertex has total degree at most
/// max_degree: sum_{j<=k} max_degree^j.
double ball_size_bound(std::size_t max_degree, std::size_t k);

/// Averaging sets built from a tree truncated at horizon n.
struct SubsetFamily {
  enum class Kind { Generation, Truncation, LastGenerations };
  Kind kind = Kind::Generation;
  /// For LastGenerations: one value used for every horizon, or one per
  /// horizon.
  std::vector<std::size_t> ell;

  std::vector<VertexId> build(const ArenaTree& t, std::size_t horizon, std::size_t horizon_index) const;
  std::string name() const;
};

struct GwSuiteConfig {
  std::vector<std::size_t> horizons;
  SubsetFamily family;
  std::size_t replicates = 100;
  std::uint64_t seed = 1;
  VerdictThresholds thresholds;
  int threads = 0;
  std::size_t retry_cap = kDefaultGwRetryCap;
  /// When set, last_generation_mass(tree, max horizon, ell) is recorded per
  /// replicate.
  std::optional<std::size_t> mass_ell;
};

struct GwSuiteResult {
  /// averaged[i]: replicate-mean pmfs at horizons[i].
  std::vector<PairStatistics> averaged;
  /// per_tree[r][i]: statistics of replicate r at horizons[i].
  std::vector<std::vector<PairStatistics>> per_tree;
  /// distance_cdf_stderr[i][k]: standard error of P(d <= k) across replicates.
  std::vector<std::vector<double>> distance_cdf_stderr;
  std::vector<std::vector<double>> ancestor_tail_stderr;
  GeometricCheck geometric;
  AncestralCheck ancestral;
  /// Fraction of individual trees passing each check.
  double per_tree_geometric_pass = 0.0;
  double per_tree_ancestral_pass = 0.0;
  std::size_t total_retries = 0;
  /// Per replicate, at the largest horizon; empty unless mass_ell is set.
  std::vector<double> last_generation_mass;
};

/// Each replicate is one Galton-Watson tree conditioned to reach the
/// largest horizon; its nested subsets A_n give a per-tree sequence whose
/// exact pair statistics are then averaged over replicates.
GwSuiteResult gw_assumption_suite(const OffspringDistribution& off, const GwSuiteConfig& config);

}  // namespace treemc
