#pragma once

#include <span>

#include "treemc/kernel.hpp"
#include "treemc/profile.hpp"
#include "treemc/tree.hpp"

namespace treemc {

/// E[M_A(f)] = sum over members u of nu Q^{h(u)} f, read off the diagonal
/// entries of the profile.
double exact_first_moment(const AncestralProfile& profile, const FiniteKernel& q, const Measure& nu,
                          const StateFunction& f);

/// Unnormalised E[M_A(f)^2]:
///   sum over keys of count * nu Q^k ((Q^a f) * (Q^b f)).
/// Divide by |A|^2 for the moment of the empirical average.
double exact_second_moment(const AncestralProfile& profile, const FiniteKernel& q, const Measure& nu,
                           const StateFunction& f);

/// E[(Mbar_A(f) - c)^2], computed as the second moment of f - c so that no
/// cancellation occurs.
double exact_l2_error(const AncestralProfile& profile, const FiniteKernel& q, const Measure& nu,
                      const StateFunction& f, double c);

/// |A|^{-2} sum over keys of count * nu Q^k ((Q^{max(a,b)} (f - c))^2): the
/// expectation over a uniform pair of the squared centred function pushed
/// down the longer branch. Its vanishing along a subset sequence forces the
/// empirical averages to converge in L^2.
double technical_term(const AncestralProfile& profile, const FiniteKernel& q, const Measure& nu,
                      const StateFunction& f, double c);

/// Var(Mbar_A(f)) under the stationary law mu of a reversible kernel,
///   |A|^{-2} sum_k <mu, f_k^2> H_A(alpha_k) - <mu, f>^2,
/// over the spectral components of f, evaluated on f - <mu, f>. Throws
/// ContractError when (mu, Q) is not a reversible invariant pair.
double stationary_variance(const ArenaTree& t, std::span<const VertexId> subset, const FiniteKernel& q,
                           const Measure& mu, const StateFunction& f);

/// Same formula from precomputed pieces; `subset_size` is |A|.
double stationary_variance(const HosoyaPolynomial& h, std::size_t subset_size, const SpectralDecomposition& spec,
                           double mean);

}  // namespace treemc
