#include "treemc/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "treemc/parallel.hpp"
#include "treemc/rng.hpp"

namespace treemc {
namespace {

// First index of the "last third" used as the limit proxy; always covers at
// least two elements so monotonicity is actually tested.
std::size_t tail_begin(std::size_t n) { return n - std::min(n, std::max<std::size_t>(2, (n + 2) / 3)); }

double stderr_of(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  long double mean = 0.0L;
  for (double x : xs) mean += x;
  mean /= static_cast<long double>(n);
  long double ss = 0.0L;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return static_cast<double>(std::sqrt(ss / static_cast<long double>(n - 1) / static_cast<long double>(n)));
}

}  // namespace

double PairStatistics::distance_cdf(std::size_t k) const {
  long double s = 0.0L;
  for (auto [d, p] : distance_pmf) {
    if (d > k) break;
    s += p;
  }
  return static_cast<double>(s);
}

double PairStatistics::ancestor_tail(std::size_t k) const {
  long double s = 0.0L;
  for (auto it = ancestor_height_pmf.upper_bound(k); it != ancestor_height_pmf.end(); ++it) s += it->second;
  return static_cast<double>(s);
}

double PairStatistics::mean_distance() const {
  long double s = 0.0L;
  for (auto [d, p] : distance_pmf) s += static_cast<long double>(d) * p;
  return static_cast<double>(s);
}

double PairStatistics::mean_ancestor_height() const {
  long double s = 0.0L;
  for (auto [k, p] : ancestor_height_pmf) s += static_cast<long double>(k) * p;
  return static_cast<double>(s);
}

PairStatistics pair_statistics(const AncestralProfile& profile) {
  PairStatistics st;
  st.subset_size = profile.subset_size();
  const long double n = static_cast<long double>(profile.subset_size());
  const long double pairs = n * n;
  std::map<std::size_t, std::uint64_t> dist, anc;
  long double height_sum = 0.0L;
  bool first = true;
  for (const auto& [key, count] : profile.counts()) {
    dist[key.branch_u + key.branch_v] += count;
    anc[key.ancestor_height] += count;
    if (key.branch_u == 0 && key.branch_v == 0) {
      height_sum += static_cast<long double>(key.ancestor_height) * count;
      if (first) {
        st.min_height = st.max_height = key.ancestor_height;
        first = false;
      }
      st.min_height = std::min(st.min_height, key.ancestor_height);
      st.max_height = std::max(st.max_height, key.ancestor_height);
    }
  }
  for (auto [d, c] : dist) st.distance_pmf[d] = static_cast<double>(c / pairs);
  for (auto [k, c] : anc) st.ancestor_height_pmf[k] = static_cast<double>(c / pairs);
  st.mean_height = static_cast<double>(height_sum / n);
  return st;
}

PairStatistics pair_statistics(const ArenaTree& t, std::span<const VertexId> subset) {
  return pair_statistics(ancestral_profile(t, subset));
}

GeometricCheck geometric_check(const std::vector<PairStatistics>& sequence, std::size_t k_max, double epsilon) {
  if (sequence.size() < 3) throw std::invalid_argument("geometric_check needs a sequence of length >= 3");
  GeometricCheck out;
  out.pass = true;
  const std::size_t begin = tail_begin(sequence.size());
  for (std::size_t k = 0; k <= k_max; ++k) {
    std::vector<double> row;
    for (const auto& st : sequence) row.push_back(st.distance_cdf(k));
    bool ok = row.back() < epsilon;
    for (std::size_t i = begin; i + 1 < row.size(); ++i)
      if (row[i + 1] > row[i] + 1e-12) ok = false;
    out.table.push_back(std::move(row));
    out.pass_by_k.push_back(ok);
    out.pass = out.pass && ok;
  }
  return out;
}

AncestralCheck ancestral_check(const std::vector<PairStatistics>& sequence, double epsilon,
                               std::optional<std::size_t> k_cap) {
  if (sequence.size() < 3) throw std::invalid_argument("ancestral_check needs a sequence of length >= 3");
  AncestralCheck out;
  const std::size_t begin = tail_begin(sequence.size());
  if (k_cap) {
    out.k_cap = *k_cap;
  } else {
    std::size_t lowest = sequence[begin].max_height;
    for (std::size_t i = begin; i < sequence.size(); ++i) lowest = std::min(lowest, sequence[i].max_height);
    if (lowest == 0) return out;  // nothing below the cap to search
    out.k_cap = lowest - 1;
  }
  for (std::size_t k = 0; k <= out.k_cap; ++k) {
    double proxy = 0.0;
    for (std::size_t i = begin; i < sequence.size(); ++i) proxy = std::max(proxy, sequence[i].ancestor_tail(k));
    out.limsup_proxy.push_back(proxy);
    if (proxy < epsilon) {
      out.k = k;
      out.pass = true;
      break;
    }
  }
  return out;
}

double last_generation_mass(const ArenaTree& t, std::size_t n, std::size_t ell) {
  const std::size_t lo = n > ell ? n - ell : 0;
  std::size_t top = 0, all = 0;
  for (VertexId v = 0; v < t.size(); ++v) {
    std::size_t h = t.height(v);
    if (h > n) continue;
    ++all;
    if (h >= lo) ++top;
  }
  return static_cast<double>(top) / static_cast<double>(all);
}

double ball_size_bound(std::size_t max_degree, std::size_t k) {
  double s = 0.0, p = 1.0;
  for (std::size_t j = 0; j <= k; ++j) {
    s += p;
    p *= static_cast<double>(max_degree);
  }
  return s;
}

std::vector<VertexId> SubsetFamily::build(const ArenaTree& t, std::size_t horizon, std::size_t horizon_index) const {
  switch (kind) {
    case Kind::Generation:
      return generation(t, horizon);
    case Kind::Truncation:
      return truncation(t, horizon);
    case Kind::LastGenerations: {
      if (ell.empty()) throw std::invalid_argument("last_generations family needs ell");
      std::size_t l = ell.size() == 1 ? ell[0] : ell.at(horizon_index);
      std::size_t lo = horizon > l ? horizon - l : 0;
      std::vector<VertexId> out;
      for (VertexId v = 0; v < t.size(); ++v)
        if (t.height(v) >= lo && t.height(v) <= horizon) out.push_back(v);
      return out;
    }
  }
  return {};
}

std::string SubsetFamily::name() const {
  switch (kind) {
    case Kind::Generation:
      return "generation";
    case Kind::Truncation:
      return "truncation";
    case Kind::LastGenerations:
      return "last_generations";
  }
  return "unknown";
}

GwSuiteResult gw_assumption_suite(const OffspringDistribution& off, const GwSuiteConfig& config) {
  const auto& horizons = config.horizons;
  if (horizons.size() < 3) throw std::invalid_argument("gw_assumption_suite needs at least 3 horizons");
  for (std::size_t i = 1; i < horizons.size(); ++i)
    if (horizons[i] <= horizons[i - 1]) throw std::invalid_argument("horizons must be strictly increasing");
  if (config.replicates < 1) throw std::invalid_argument("gw_assumption_suite needs replicates >= 1");
  if (config.family.kind == SubsetFamily::Kind::LastGenerations && config.family.ell.size() != 1 &&
      config.family.ell.size() != horizons.size())
    throw std::invalid_argument("ell must have one entry or one per horizon");
  const std::size_t top = horizons.back();
  const std::size_t reps = config.replicates;

  GwSuiteResult out;
  out.per_tree.assign(reps, {});
  std::vector<std::size_t> retries(reps, 0);
  if (config.mass_ell) out.last_generation_mass.assign(reps, 0.0);
  parallel_for(reps, resolve_threads(config.threads), [&](std::size_t r) {
    GwSample sample = gw_conditioned(off, top, derive_seed(config.seed, r), config.retry_cap);
    retries[r] = sample.retries;
    if (config.mass_ell) out.last_generation_mass[r] = last_generation_mass(sample.tree, top, *config.mass_ell);
    auto& row = out.per_tree[r];
    for (std::size_t i = 0; i < horizons.size(); ++i)
      row.push_back(pair_statistics(sample.tree, config.family.build(sample.tree, horizons[i], i)));
  });
  for (auto x : retries) out.total_retries += x;

  const double inv = 1.0 / static_cast<double>(reps);
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    PairStatistics avg;
    avg.min_height = out.per_tree[0][i].min_height;
    avg.max_height = out.per_tree[0][i].max_height;
    std::map<std::size_t, long double> dist, anc;
    long double size = 0.0L, height = 0.0L;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& st = out.per_tree[r][i];
      for (auto [d, p] : st.distance_pmf) dist[d] += p;
      for (auto [k, p] : st.ancestor_height_pmf) anc[k] += p;
      size += static_cast<long double>(st.subset_size);
      height += st.mean_height;
      avg.min_height = std::min(avg.min_height, st.min_height);
      avg.max_height = std::min(avg.max_height, st.max_height);
    }
    for (auto [d, p] : dist) avg.distance_pmf[d] = static_cast<double>(p * inv);
    for (auto [k, p] : anc) avg.ancestor_height_pmf[k] = static_cast<double>(p * inv);
    avg.subset_size = static_cast<std::size_t>(std::llround(static_cast<double>(size * inv)));
    avg.mean_height = static_cast<double>(height * inv);
    out.averaged.push_back(std::move(avg));

    std::vector<double> se_d, se_a;
    for (std::size_t k = 0; k <= top; ++k) {
      std::vector<double> xs_d, xs_a;
      for (std::size_t r = 0; r < reps; ++r) {
        xs_d.push_back(out.per_tree[r][i].distance_cdf(k));
        xs_a.push_back(out.per_tree[r][i].ancestor_tail(k));
      }
      se_d.push_back(stderr_of(xs_d));
      se_a.push_back(stderr_of(xs_a));
    }
    out.distance_cdf_stderr.push_back(std::move(se_d));
    out.ancestor_tail_stderr.push_back(std::move(se_a));
  }

  const auto& th = config.thresholds;
  out.geometric = geometric_check(out.averaged, th.k_max, th.geometric_epsilon);
  out.ancestral = ancestral_check(out.averaged, th.ancestral_epsilon, th.ancestral_k_cap);
  std::size_t geo_pass = 0, anc_pass = 0;
  for (const auto& row : out.per_tree) {
    if (geometric_check(row, th.k_max, th.geometric_epsilon).pass) ++geo_pass;
    if (ancestral_check(row, th.ancestral_epsilon, th.ancestral_k_cap).pass) ++anc_pass;
  }
  out.per_tree_geometric_pass = static_cast<double>(geo_pass) * inv;
  out.per_tree_ancestral_pass = static_cast<double>(anc_pass) * inv;
  return out;
}

}  // namespace treemc
