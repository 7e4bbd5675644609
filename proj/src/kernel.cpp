#include "treemc/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "treemc/errors.hpp"

namespace treemc {
namespace {

constexpr double kSimplexTol = 1e-12;
constexpr double kClampWindow = 1e-10;
constexpr double kEigenspaceMerge = 1e-9;

Eigen::VectorXd normalized_nonnegative(Eigen::VectorXd w) {
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w(i) < 0.0) w(i) = 0.0;
  double total = w.sum();
  if (!(total > 0.0)) throw std::runtime_error("degenerate probability vector");
  return w / total;
}

}  // namespace

FiniteKernel::FiniteKernel(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
  if (rows_.rows() == 0 || rows_.rows() != rows_.cols())
    throw std::invalid_argument("kernel must be a nonempty square matrix");
  for (Eigen::Index x = 0; x < rows_.rows(); ++x) {
    for (Eigen::Index y = 0; y < rows_.cols(); ++y)
      if (!(rows_(x, y) >= 0.0)) throw std::invalid_argument("kernel entries must be nonnegative");
    if (std::abs(rows_.row(x).sum() - 1.0) > kSimplexTol)
      throw std::invalid_argument("kernel row " + std::to_string(x) + " does not sum to 1");
  }
}

FiniteKernel FiniteKernel::from_rows(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    if (static_cast<Eigen::Index>(rows[x].size()) != n) throw std::invalid_argument("kernel must be square");
    for (Eigen::Index y = 0; y < n; ++y) m(x, y) = rows[x][y];
  }
  return FiniteKernel(std::move(m));
}

FiniteKernel FiniteKernel::identity(std::size_t states) {
  return FiniteKernel(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states)));
}

Measure::Measure(Eigen::VectorXd weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw std::invalid_argument("measure over zero states");
  for (Eigen::Index x = 0; x < weights_.size(); ++x)
    if (!(weights_(x) >= 0.0)) throw std::invalid_argument("measure weights must be nonnegative");
  if (std::abs(weights_.sum() - 1.0) > kSimplexTol) throw std::invalid_argument("measure weights must sum to 1");
}

Measure Measure::uniform(std::size_t states) {
  const auto n = static_cast<Eigen::Index>(states);
  return Measure(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

Measure Measure::dirac(std::size_t states, std::size_t x) {
  if (x >= states) throw std::invalid_argument("dirac state out of range");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(states));
  w(static_cast<Eigen::Index>(x)) = 1.0;
  return Measure(std::move(w));
}

Eigen::VectorXd evolve(const Measure& nu, const FiniteKernel& q, std::size_t n) {
  if (nu.states() != q.states()) throw std::invalid_argument("measure/kernel dimension mismatch");
  Eigen::RowVectorXd row = nu.weights().transpose();
  for (std::size_t i = 0; i < n; ++i) row = row * q.matrix();
  return row.transpose();
}

StateFunction iterate_function(const FiniteKernel& q, const StateFunction& f, std::size_t n) {
  if (static_cast<std::size_t>(f.size()) != q.states()) throw std::invalid_argument("function/kernel dimension mismatch");
  StateFunction g = f;
  for (std::size_t i = 0; i < n; ++i) g = q.matrix() * g;
  return g;
}

Measure limiting_measure(const FiniteKernel& q, const Measure& nu) {
  if (nu.states() != q.states()) throw std::invalid_argument("measure/kernel dimension mismatch");
  const auto n = static_cast<Eigen::Index>(q.states());
  // Lazy powers converge to the projector onto invariant measures; square
  // until stationary.
  Eigen::MatrixXd p = 0.5 * (Eigen::MatrixXd::Identity(n, n) + q.matrix());
  for (int i = 0; i < 200; ++i) {
    Eigen::MatrixXd p2 = p * p;
    double change = (p2 - p).cwiseAbs().maxCoeff();
    p = std::move(p2);
    if (change < 1e-16) break;
  }
  Eigen::VectorXd mu = (nu.weights().transpose() * p).transpose();
  return Measure(normalized_nonnegative(mu));
}

InvariantMeasure invariant_measure(const FiniteKernel& q) {
  const auto n = static_cast<Eigen::Index>(q.states());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(q.matrix() - id);
  const auto& sv = svd.singularValues();
  std::size_t multiplicity = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) < 1e-9) ++multiplicity;
  multiplicity = std::max<std::size_t>(multiplicity, 1);

  Eigen::VectorXd mu;
  if (multiplicity == 1) {
    // (Q^T - I) mu = 0 with one equation replaced by the normalisation.
    Eigen::MatrixXd a = q.matrix().transpose() - id;
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    mu = normalized_nonnegative(a.fullPivLu().solve(b));
  } else {
    mu = limiting_measure(q, Measure::uniform(q.states())).weights();
  }
  double residual = (mu.transpose() * q.matrix() - mu.transpose()).cwiseAbs().sum();
  return InvariantMeasure{Measure(mu), multiplicity == 1, multiplicity, residual};
}

bool is_reversible(const FiniteKernel& q, const Measure& mu, double tol) {
  if (mu.states() != q.states()) throw std::invalid_argument("measure/kernel dimension mismatch");
  const std::size_t n = q.states();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y)
      if (std::abs(mu[x] * q(x, y) - mu[y] * q(y, x)) > tol) return false;
  return true;
}

std::vector<SpectralComponent> SpectralDecomposition::significant_components(double rel_tol) const {
  double total = 0.0;
  for (const auto& c : components) total += c.weight;
  std::vector<SpectralComponent> out;
  for (const auto& c : components)
    if (c.weight > rel_tol * total && c.weight > 0.0) out.push_back(c);
  return out;
}

SpectralDecomposition spectral_decompose(const FiniteKernel& q, const Measure& mu, const StateFunction& f) {
  const std::size_t n = q.states();
  if (mu.states() != n || static_cast<std::size_t>(f.size()) != n)
    throw std::invalid_argument("spectral_decompose: dimension mismatch");
  double residual = (mu.weights().transpose() * q.matrix() - mu.weights().transpose()).cwiseAbs().sum();
  if (residual > 1e-9) throw ContractError("spectral_decompose: measure is not invariant for the kernel");
  if (!is_reversible(q, mu, 1e-10)) throw ContractError("spectral_decompose: (mu, Q) is not reversible");

  SpectralDecomposition out;
  for (std::size_t x = 0; x < n; ++x)
    if (mu[x] > 0.0) out.support.push_back(x);
  if (out.support.size() < n)
    out.warnings.push_back("restricted to the support of mu: " + std::to_string(n - out.support.size()) +
                           " zero-mass state(s) dropped");

  const auto m = static_cast<Eigen::Index>(out.support.size());
  Eigen::VectorXd root_mass(m);
  for (Eigen::Index i = 0; i < m; ++i) root_mass(i) = std::sqrt(mu[out.support[i]]);
  Eigen::MatrixXd sym(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) sym(i, j) = root_mass(i) * q(out.support[i], out.support[j]) / root_mass(j);
  sym = 0.5 * (sym + sym.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("spectral_decompose: eigensolver failed");

  // Coefficients of f in the orthonormal basis psi of the symmetrised matrix:
  // <f, phi_i>_mu = psi_i . (sqrt(mu) * f).
  Eigen::VectorXd scaled_f(m);
  for (Eigen::Index i = 0; i < m; ++i) scaled_f(i) = root_mass(i) * f(static_cast<Eigen::Index>(out.support[i]));

  out.eigenfunctions = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), m);
  std::vector<double> coeff(static_cast<std::size_t>(m));
  for (Eigen::Index col = 0; col < m; ++col) {
    Eigen::Index src = m - 1 - col;  // solver sorts ascending
    double value = solver.eigenvalues()(src);
    double overshoot = std::abs(value) - 1.0;
    if (overshoot > 0.0) {
      out.clamp_deviation = std::max(out.clamp_deviation, overshoot);
      if (overshoot > kClampWindow)
        throw std::runtime_error("spectral_decompose: eigenvalue outside [-1, 1] beyond clamping window");
      value = std::clamp(value, -1.0, 1.0);
    }
    out.eigenvalues.push_back(value);
    const auto psi = solver.eigenvectors().col(src);
    for (Eigen::Index i = 0; i < m; ++i)
      out.eigenfunctions(static_cast<Eigen::Index>(out.support[i]), col) = psi(i) / root_mass(i);
    coeff[static_cast<std::size_t>(col)] = psi.dot(scaled_f);
  }

  for (std::size_t i = 0; i < out.eigenvalues.size();) {
    std::size_t j = i;
    SpectralComponent comp;
    comp.function = StateFunction::Zero(static_cast<Eigen::Index>(n));
    double sum_values = 0.0;
    while (j < out.eigenvalues.size() && std::abs(out.eigenvalues[j] - out.eigenvalues[i]) <= kEigenspaceMerge) {
      comp.function += coeff[j] * out.eigenfunctions.col(static_cast<Eigen::Index>(j));
      comp.weight += coeff[j] * coeff[j];
      sum_values += out.eigenvalues[j];
      ++j;
    }
    comp.multiplicity = j - i;
    comp.eigenvalue = sum_values / static_cast<double>(comp.multiplicity);
    out.components.push_back(std::move(comp));
    i = j;
  }
  return out;
}

DecayFit fit_decay(const std::vector<double>& values, double tol) {
  DecayFit fit;
  const std::size_t n = values.size();
  if (n == 0) return fit;
  std::size_t tail = n - std::max<std::size_t>(1, n / 3);
  double tail_max = *std::max_element(values.begin() + static_cast<std::ptrdiff_t>(tail), values.end());

  // Log-linear regression over the positive entries of the second half.
  std::vector<std::pair<double, double>> pts;
  bool hit_zero = false;
  for (std::size_t i = n / 2; i < n; ++i) {
    if (values[i] > 1e-300)
      pts.emplace_back(static_cast<double>(i), std::log(values[i]));
    else
      hit_zero = true;
  }
  if (pts.size() >= 3) {
    double mx = 0, my = 0;
    for (auto [x, y] : pts) {
      mx += x;
      my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxx = 0, sxy = 0, syy = 0;
    for (auto [x, y] : pts) {
      sxx += (x - mx) * (x - mx);
      sxy += (x - mx) * (y - my);
      syy += (y - my) * (y - my);
    }
    double slope = sxy / sxx;
    fit.rate = std::exp(slope);
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
  } else if (hit_zero) {
    fit.rate = 0.0;
    fit.r_squared = 1.0;
  }
  fit.vanishing = tail_max <= tol || (fit.rate < 1.0 - 1e-3 && fit.r_squared >= 0.9);
  return fit;
}

ErgodicityReport ergodicity_report(const FiniteKernel& q, const Measure& nu, const StateFunction& f, std::size_t n_max,
                                   const std::vector<std::size_t>& k_grid, double tol) {
  if (nu.states() != q.states() || static_cast<std::size_t>(f.size()) != q.states())
    throw std::invalid_argument("ergodicity_report: dimension mismatch");
  ErgodicityReport rep;
  InvariantMeasure inv = invariant_measure(q);
  rep.unique_invariant = inv.unique;
  rep.mu = inv.unique ? inv.measure : limiting_measure(q, nu);
  rep.c_f = rep.mu.integrate(f);

  const StateFunction f2 = f.cwiseProduct(f);
  std::vector<StateFunction> centered_powers;
  centered_powers.reserve(n_max + 1);
  StateFunction qf = f;
  Eigen::RowVectorXd nuq = nu.weights().transpose();
  for (std::size_t n = 0; n <= n_max; ++n) {
    StateFunction centered = qf.array() - rep.c_f;
    rep.sup_deviation.push_back(centered.cwiseAbs().maxCoeff());
    rep.tv_distance.push_back(0.5 * (nuq.transpose() - rep.mu.weights()).cwiseAbs().sum());
    rep.second_moment.push_back(nuq.dot(f2));
    centered_powers.push_back(centered.cwiseProduct(centered));
    qf = q.matrix() * qf;
    nuq = nuq * q.matrix();
  }
  for (std::size_t k : k_grid) {
    Eigen::VectorXd nuk = evolve(nu, q, k);
    CenteredMoments cm{k, {}};
    for (const auto& sq : centered_powers) cm.values.push_back(nuk.dot(sq));
    rep.centered.push_back(std::move(cm));
  }

  double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
  rep.sup_fit = fit_decay(rep.sup_deviation, tol * scale);
  rep.tv_fit = fit_decay(rep.tv_distance, tol);
  rep.ergodic = rep.unique_invariant && rep.sup_fit.vanishing && rep.tv_fit.vanishing;
  if (!rep.unique_invariant)
    rep.reason = "invariant measure is not unique (eigenvalue 1 has multiplicity " +
                 std::to_string(inv.eigenvalue_one_multiplicity) + ")";
  else if (!rep.sup_fit.vanishing)
    rep.reason = "sup_x |Q^n f - c_f| does not vanish";
  else if (!rep.tv_fit.vanishing)
    rep.reason = "total variation distance to mu does not vanish";
  else
    rep.reason = "ergodic";
  return rep;
}

}  // namespace treemc
