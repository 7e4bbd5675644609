#include "treemc/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "treemc/errors.hpp"
#include "treemc/parallel.hpp"
#include "treemc/rng.hpp"

namespace treemc {
namespace {

std::vector<double> cumulative(const Eigen::VectorXd& p) {
  std::vector<double> cdf(static_cast<std::size_t>(p.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p(i);
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  return cdf;
}

}  // namespace

ProcessSampler::ProcessSampler(const FiniteKernel& q, const Measure& nu) {
  if (q.states() != nu.states()) throw std::invalid_argument("sampler: kernel/measure dimension mismatch");
  initial_cdf_ = cumulative(nu.weights());
  for (std::size_t x = 0; x < q.states(); ++x)
    row_cdf_.push_back(cumulative(q.matrix().row(static_cast<Eigen::Index>(x)).transpose()));
}

std::size_t ProcessSampler::draw(const std::vector<double>& cdf, double u) {
  // The last state with positive mass absorbs rounding in the cumulative sum.
  std::size_t last = cdf.size() - 1;
  while (last > 0 && cdf[last] == cdf[last - 1]) --last;
  for (std::size_t i = 0; i < last; ++i)
    if (u < cdf[i]) return i;
  return last;
}

void ProcessSampler::sample_into(const ArenaTree& t, std::uint64_t seed, std::vector<std::size_t>& values) const {
  values.resize(t.size());
  for (VertexId v : t.bfs_order()) {
    double u = to_unit_interval(derive_seed(seed, v));
    auto parent = t.parent(v);
    values[v] = parent ? draw(row_cdf_[values[*parent]], u) : draw(initial_cdf_, u);
  }
}

ProcessSample ProcessSampler::sample(const ArenaTree& t, std::uint64_t seed) const {
  std::vector<std::size_t> values;
  sample_into(t, seed, values);
  return ProcessSample(t, std::move(values));
}

ProcessSample sample_process(const ArenaTree& t, const FiniteKernel& q, const Measure& nu, std::uint64_t seed) {
  return ProcessSampler(q, nu).sample(t, seed);
}

double empirical_sum(const ProcessSample& s, std::span<const VertexId> subset, const StateFunction& f) {
  if (subset.empty()) throw std::invalid_argument("empirical average over an empty subset");
  double total = 0.0;
  for (VertexId v : subset) {
    s.tree().check_vertex(v);
    total += f(static_cast<Eigen::Index>(s.value(v)));
  }
  return total;
}

double empirical_average(const ProcessSample& s, std::span<const VertexId> subset, const StateFunction& f) {
  return empirical_sum(s, subset, f) / static_cast<double>(subset.size());
}

double jackknife_standard_error(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  long double total = 0.0L;
  for (double v : values) total += v;
  // Leave-one-out means and their spread.
  long double mean_loo = 0.0L;
  std::vector<long double> loo(n);
  for (std::size_t i = 0; i < n; ++i) {
    loo[i] = (total - values[i]) / static_cast<long double>(n - 1);
    mean_loo += loo[i];
  }
  mean_loo /= static_cast<long double>(n);
  long double ss = 0.0L;
  for (auto x : loo) ss += (x - mean_loo) * (x - mean_loo);
  return static_cast<double>(std::sqrt(ss * static_cast<long double>(n - 1) / static_cast<long double>(n)));
}

L2Estimate l2_error_mc(const ArenaTree& t, const FiniteKernel& q, const Measure& nu, const StateFunction& f,
                       std::span<const VertexId> subset, std::size_t replicates, std::uint64_t seed, double c_f,
                       int threads) {
  if (replicates < 2) throw std::invalid_argument("l2_error_mc needs at least 2 replicates");
  if (subset.empty()) throw std::invalid_argument("l2_error_mc: empty subset");
  for (VertexId v : subset) t.check_vertex(v);
  ProcessSampler sampler(q, nu);
  std::vector<double> squared(replicates);
  parallel_for(replicates, resolve_threads(threads), [&](std::size_t r) {
    thread_local std::vector<std::size_t> values;
    sampler.sample_into(t, derive_seed(seed, r), values);
    double sum = 0.0;
    for (VertexId v : subset) sum += f(static_cast<Eigen::Index>(values[v]));
    double err = sum / static_cast<double>(subset.size()) - c_f;
    squared[r] = err * err;
  });
  long double total = 0.0L;
  for (double v : squared) total += v;
  return L2Estimate{static_cast<double>(total / static_cast<long double>(replicates)),
                    jackknife_standard_error(squared), c_f, replicates};
}

L2Estimate l2_error_mc(const ArenaTree& t, const FiniteKernel& q, const Measure& nu, const StateFunction& f,
                       std::span<const VertexId> subset, std::size_t replicates, std::uint64_t seed, int threads) {
  InvariantMeasure inv = invariant_measure(q);
  if (!inv.unique) throw ContractError("l2_error_mc: c_f undefined, invariant measure is not unique");
  return l2_error_mc(t, q, nu, f, subset, replicates, seed, inv.measure.integrate(f), threads);
}

}  // namespace treemc
