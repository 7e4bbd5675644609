#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace treemc {

/// Real function on the finite state space, indexed by state.
using StateFunction = Eigen::VectorXd;

/// Row-stochastic transition matrix on states [0, S).
class FiniteKernel {
 public:
  /// Entries must be nonnegative with rows summing to 1 within 1e-12.
  explicit FiniteKernel(Eigen::MatrixXd rows);
  static FiniteKernel from_rows(const std::vector<std::vector<double>>& rows);
  static FiniteKernel identity(std::size_t states);

  std::size_t states() const { return static_cast<std::size_t>(rows_.rows()); }
  const Eigen::MatrixXd& matrix() const { return rows_; }
  double operator()(std::size_t x, std::size_t y) const { return rows_(x, y); }

 private:
  Eigen::MatrixXd rows_;
};

/// Probability vector over the states.
class Measure {
 public:
  /// Weights must be nonnegative and sum to 1 within 1e-12.
  explicit Measure(Eigen::VectorXd weights);
  static Measure uniform(std::size_t states);
  static Measure dirac(std::size_t states, std::size_t x);

  std::size_t states() const { return static_cast<std::size_t>(weights_.size()); }
  const Eigen::VectorXd& weights() const { return weights_; }
  double operator[](std::size_t x) const { return weights_(x); }

  /// <mu, f>
  double integrate(const StateFunction& f) const { return weights_.dot(f); }

 private:
  Eigen::VectorXd weights_;
};

/// nu Q^n as a row vector.
Eigen::VectorXd evolve(const Measure& nu, const FiniteKernel& q, std::size_t n);

/// Q^n f by repeated matrix-vector products.
StateFunction iterate_function(const FiniteKernel& q, const StateFunction& f, std::size_t n);

struct InvariantMeasure {
  Measure measure;
  /// False when the eigenvalue-1 space of Q has dimension > 1; `measure` is
  /// then one invariant measure among many (the lazy-chain limit from the
  /// uniform law).
  bool unique = true;
  std::size_t eigenvalue_one_multiplicity = 1;
  /// ||mu Q - mu||_1
  double residual = 0.0;
};

InvariantMeasure invariant_measure(const FiniteKernel& q);

/// Limit of the Cesaro averages of nu Q^n, computed as the limit of the
/// lazy chain (I + Q) / 2 started from nu. Always an invariant measure.
Measure limiting_measure(const FiniteKernel& q, const Measure& nu);

/// max_{x,y} |mu_x Q_xy - mu_y Q_yx| <= tol.
bool is_reversible(const FiniteKernel& q, const Measure& mu, double tol = 1e-12);

/// One eigenspace of Q in L^2(mu) together with the projection of f onto it.
struct SpectralComponent {
  double eigenvalue = 0.0;
  std::size_t multiplicity = 1;
  StateFunction function;  // f_k, with Q f_k = eigenvalue * f_k
  double weight = 0.0;     // <mu, f_k^2>
};

struct SpectralDecomposition {
  /// Eigenvalues of Q restricted to the support of mu, descending.
  std::vector<double> eigenvalues;
  /// Columns are the matching eigenfunctions, orthonormal in L^2(mu) and
  /// zero off the support.
  Eigen::MatrixXd eigenfunctions;
  /// Eigenspaces (eigenvalues within 1e-9 merged), descending.
  std::vector<SpectralComponent> components;
  std::vector<std::size_t> support;
  /// Largest amount by which a raw eigenvalue left [-1, 1] before clamping.
  double clamp_deviation = 0.0;
  std::vector<std::string> warnings;

  /// Components whose weight exceeds rel_tol * <mu, f^2>.
  std::vector<SpectralComponent> significant_components(double rel_tol = 1e-12) const;
};

/// Spectral expansion of f under a reversible pair (Q, mu) via the
/// symmetrisation D^{1/2} Q D^{-1/2}, D = diag(mu). States with zero mass
/// are dropped with a warning. Throws ContractError if mu is not invariant
/// or the pair is not reversible.
SpectralDecomposition spectral_decompose(const FiniteKernel& q, const Measure& mu, const StateFunction& f);

/// Summary of how a scalar sequence decays.
struct DecayFit {
  bool vanishing = false;
  /// Fitted geometric ratio over the second half of the sequence (0 when
  /// the sequence reached exactly zero).
  double rate = 1.0;
  double r_squared = 0.0;
};

/// Vanishing if the last third stays below `tol`, or if a log-linear fit over
/// the second half has ratio < 1 - 1e-3 with R^2 >= 0.9.
DecayFit fit_decay(const std::vector<double>& values, double tol);

struct CenteredMoments {
  std::size_t k = 0;
  /// nu Q^k ((Q^n f - c_f)^2) for n = 0..n_max.
  std::vector<double> values;
};

struct ErgodicityReport {
  bool unique_invariant = true;
  Measure mu = Measure::uniform(1);
  double c_f = 0.0;
  std::vector<double> sup_deviation;   // sup_x |Q^n f(x) - c_f|
  std::vector<double> tv_distance;     // ||nu Q^n - mu||_TV
  std::vector<double> second_moment;   // nu Q^n (f^2)
  std::vector<CenteredMoments> centered;
  DecayFit sup_fit;
  DecayFit tv_fit;
  bool ergodic = false;
  std::string reason;
};

/// Diagnostic sequences for n = 0..n_max. c_f is <mu, f> for the invariant
/// measure reached from nu; a non-unique invariant measure is flagged as
/// non-ergodic rather than raised.
ErgodicityReport ergodicity_report(const FiniteKernel& q, const Measure& nu, const StateFunction& f,
                                   std::size_t n_max, const std::vector<std::size_t>& k_grid = {0, 1, 2, 5, 10},
                                   double tol = 1e-8);

}  // namespace treemc
