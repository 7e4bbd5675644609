#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "treemc/tree.hpp"

namespace treemc {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Position of an ordered pair (u, v) relative to its common ancestor w:
/// h(w), d(w, u), d(w, v).
struct ProfileKey {
  std::size_t ancestor_height = 0;
  std::size_t branch_u = 0;
  std::size_t branch_v = 0;
  auto operator<=>(const ProfileKey&) const = default;
};

/// Counts of ordered pairs of a vertex subset A, grouped by ProfileKey.
/// Sums to |A|^2 and is symmetric under swapping the two branches.
class AncestralProfile {
 public:
  AncestralProfile() = default;
  AncestralProfile(std::size_t subset_size, std::map<ProfileKey, std::uint64_t> counts)
      : subset_size_(subset_size), counts_(std::move(counts)) {}

  std::size_t subset_size() const { return subset_size_; }
  const std::map<ProfileKey, std::uint64_t>& counts() const { return counts_; }
  std::uint64_t count(const ProfileKey& key) const;
  std::uint64_t total() const;

  std::size_t max_ancestor_height() const;
  std::size_t max_branch() const;

 private:
  std::size_t subset_size_ = 0;
  std::map<ProfileKey, std::uint64_t> counts_;
};

/// Post-order dynamic program: each vertex keeps a depth histogram of the
/// A-members below it, and pairs whose common ancestor is w come from
/// cross-multiplying the histograms of w's children (and w itself). The
/// largest child histogram is adopted in place, others are merged into it.
/// Throws std::invalid_argument on an empty subset, an out-of-range vertex
/// or a repeated vertex.
AncestralProfile ancestral_profile(const ArenaTree& t, std::span<const VertexId> subset);

/// Hosoya-Wiener polynomial H_A(x) = sum over ordered pairs (u, v) of A,
/// u = v included, of x^{d(u, v)}. Coefficients are exact pair counts.
class HosoyaPolynomial {
 public:
  HosoyaPolynomial() = default;
  explicit HosoyaPolynomial(std::vector<std::uint64_t> coefficients);

  /// coefficients()[d] = number of ordered pairs at distance d.
  const std::vector<std::uint64_t>& coefficients() const { return coeffs_; }
  std::size_t degree() const { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }

  double operator()(double x) const;
  Rational operator()(const Rational& x) const;

  bool operator==(const HosoyaPolynomial&) const = default;

 private:
  std::vector<std::uint64_t> coeffs_;
};

HosoyaPolynomial hosoya_polynomial(const AncestralProfile& profile);
HosoyaPolynomial hosoya_polynomial(const ArenaTree& t, std::span<const VertexId> subset);
/// Polynomial of the whole tree.
HosoyaPolynomial hosoya_polynomial(const ArenaTree& t);

/// Evaluates H_A(alpha).
double hosoya_wiener(const ArenaTree& t, std::span<const VertexId> subset, double alpha);

/// Horner evaluation of a signed integer polynomial.
double evaluate_polynomial(const std::vector<std::int64_t>& coefficients, double x);

/// Parses a decimal literal such as "-0.35" or "1e-2" into an exact rational.
Rational rational_from_decimal(const std::string& text);

/// Shortest round-trip decimal form of x, converted exactly.
Rational rational_from_double(double x);

}  // namespace treemc
