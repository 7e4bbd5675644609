#include "treemc/moments.hpp"

#include <stdexcept>
#include <vector>

namespace treemc {
namespace {

void check_dims(const FiniteKernel& q, const Measure& nu, const StateFunction& f) {
  if (nu.states() != q.states() || static_cast<std::size_t>(f.size()) != q.states())
    throw std::invalid_argument("kernel, measure and function dimensions disagree");
}

std::vector<Eigen::VectorXd> measure_powers(const Measure& nu, const FiniteKernel& q, std::size_t max_power) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(max_power + 1);
  Eigen::RowVectorXd row = nu.weights().transpose();
  for (std::size_t k = 0; k <= max_power; ++k) {
    out.push_back(row.transpose());
    row = row * q.matrix();
  }
  return out;
}

std::vector<StateFunction> function_powers(const FiniteKernel& q, const StateFunction& f, std::size_t max_power) {
  std::vector<StateFunction> out;
  out.reserve(max_power + 1);
  StateFunction g = f;
  for (std::size_t a = 0; a <= max_power; ++a) {
    out.push_back(g);
    g = q.matrix() * g;
  }
  return out;
}

}  // namespace

double exact_first_moment(const AncestralProfile& profile, const FiniteKernel& q, const Measure& nu,
                          const StateFunction& f) {
  check_dims(q, nu, f);
  const auto nuq = measure_powers(nu, q, profile.max_ancestor_height());
  long double total = 0.0L;
  for (const auto& [key, count] : profile.counts())
    if (key.branch_u == 0 && key.branch_v == 0)
      total += static_cast<long double>(count) * nuq[key.ancestor_height].dot(f);
  return static_cast<double>(total);
}

double exact_second_moment(const AncestralProfile& profile, const FiniteKernel& q, const Measure& nu,
                           const StateFunction& f) {
  check_dims(q, nu, f);
  const auto nuq = measure_powers(nu, q, profile.max_ancestor_height());
  const auto qf = function_powers(q, f, profile.max_branch());
  long double total = 0.0L;
  for (const auto& [key, count] : profile.counts()) {
    const auto& w = nuq[key.ancestor_height];
    const auto& fa = qf[key.branch_u];
    const auto& fb = qf[key.branch_v];
    long double inner = 0.0L;
    for (Eigen::Index x = 0; x < w.size(); ++x) inner += static_cast<long double>(w(x)) * fa(x) * fb(x);
    total += static_cast<long double>(count) * inner;
  }
  return static_cast<double>(total);
}

double exact_l2_error(const AncestralProfile& profile, const FiniteKernel& q, const Measure& nu,
                      const StateFunction& f, double c) {
  StateFunction centered = f.array() - c;
  double n = static_cast<double>(profile.subset_size());
  return exact_second_moment(profile, q, nu, centered) / (n * n);
}

double technical_term(const AncestralProfile& profile, const FiniteKernel& q, const Measure& nu,
                      const StateFunction& f, double c) {
  check_dims(q, nu, f);
  StateFunction centered = f.array() - c;
  const auto nuq = measure_powers(nu, q, profile.max_ancestor_height());
  const auto qf = function_powers(q, centered, profile.max_branch());
  long double total = 0.0L;
  for (const auto& [key, count] : profile.counts()) {
    const auto& g = qf[std::max(key.branch_u, key.branch_v)];
    total += static_cast<long double>(count) * nuq[key.ancestor_height].dot(g.cwiseProduct(g));
  }
  long double n = static_cast<long double>(profile.subset_size());
  return static_cast<double>(total / (n * n));
}

double stationary_variance(const HosoyaPolynomial& h, std::size_t subset_size, const SpectralDecomposition& spec,
                           double mean) {
  long double total = 0.0L;
  for (const auto& comp : spec.components) total += static_cast<long double>(comp.weight) * h(comp.eigenvalue);
  long double n = static_cast<long double>(subset_size);
  return static_cast<double>(total / (n * n) - static_cast<long double>(mean) * mean);
}

double stationary_variance(const ArenaTree& t, std::span<const VertexId> subset, const FiniteKernel& q,
                           const Measure& mu, const StateFunction& f) {
  // Decomposing f - <mu, f> leaves only a rounding-level constant component,
  // so the final subtraction does not cancel against |A|^2 <mu, f>^2.
  const StateFunction g = f.array() - mu.integrate(f);
  SpectralDecomposition spec = spectral_decompose(q, mu, g);
  return stationary_variance(hosoya_polynomial(t, subset), subset.size(), spec, mu.integrate(g));
}

}  // namespace treemc
