#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "treemc/free_trees.hpp"
#include "treemc/profile.hpp"
#include "treemc/rng.hpp"
#include "treemc/tree.hpp"

namespace treemc {

template <typename Value>
struct Minimizers {
  Value value{};
  /// Catalog indices attaining the minimum, ascending.
  std::vector<std::size_t> indices;
};

/// Exact minimum of H_T(alpha) over the catalog.
Minimizers<Rational> hosoya_minimizers(const FreeTreeCatalog& catalog, const Rational& alpha);
/// Floating version; values within 1e-12 relative of the minimum tie.
Minimizers<double> hosoya_minimizers(const FreeTreeCatalog& catalog, double alpha);

/// (|B| - |R|)^2 for the parity 2-colouring by height; equals H_T(-1).
std::uint64_t bipartite_imbalance(const ArenaTree& t);

/// sum over v of alpha^{d(root, v)} for the subtree seen from `root`
/// (the whole tree, unrooted). Coefficient d counts vertices at distance d.
std::vector<std::uint64_t> rooted_profile_coefficients(const ArenaTree& t, VertexId root);
Rational rooted_profile(const ArenaTree& t, VertexId root, const Rational& alpha);

/// The two components left after deleting edge (u, v), re-rooted at u and v.
std::pair<ArenaTree, ArenaTree> split_at_edge(const ArenaTree& t, VertexId u, VertexId v);

/// Path of k vertices seen from position j: (1 + a - a^j - a^{k-j+1}) / (1 - a).
/// Throws std::invalid_argument unless 1 <= j <= k and alpha != 1.
double rooted_line_profile(std::size_t k, std::size_t j, double alpha);
Rational rooted_line_profile(std::size_t k, std::size_t j, const Rational& alpha);

/// Local rewrites showing a non-path tree is not a minimiser.
///   case1  (0 < alpha < 1): root at a leaf, move the first child of the first
///          branching vertex onto that leaf.
///   case2  (-1 < alpha < 0): replace the star around a non-protected vertex by
///          a path.
///   case3a (-1 < alpha < 0): graft the positive-profile branch T_{v_1} on u_0.
///   case3b (-1 < alpha < 0): move the leaves u_1..u_l onto v_1.
enum class MoveCase { Case1, Case2, Case3a, Case3b };

std::string to_string(MoveCase c);
MoveCase move_case_from_string(const std::string& name);

struct MoveResult {
  /// Same vertex ids as the input, rooted at vertex 0.
  ArenaTree rewritten;
  std::vector<std::pair<VertexId, VertexId>> removed_edges;
  std::vector<std::pair<VertexId, VertexId>> added_edges;
  /// H_T(alpha) - H_T'(alpha), from the exact coefficient difference.
  Rational delta;
  /// Guaranteed lower bound on delta: 0 for cases 1 and 2,
  /// 2 C_{v_1} (sum_{i>=2} C_{v_i}) (a^2 - a^4) for 3a (attained exactly),
  /// 2 l (a^2 - a^4) for 3b.
  Rational bound;
  std::string description;
};

struct MoveRefusal {
  std::string condition;
};

using MoveOutcome = std::variant<MoveResult, MoveRefusal>;

/// Random tree on n vertices (n >= 4) in which vertex 0 carries at least two
/// leaves and one further neighbour, the rest being a uniform labelled tree
/// plus stray leaves. Vertex 0 is then the non-protected vertex the moves
/// pick, so the case 2 and 3 conditions are met often.
ArenaTree random_move_instance(std::size_t n, Rng& rng);

/// Applies the rewrite, choosing free vertices by smallest index. Line
/// graphs and inputs failing the case's conditions get a MoveRefusal.
MoveOutcome proof_move(const ArenaTree& t, MoveCase which, const Rational& alpha);

}  // namespace treemc
