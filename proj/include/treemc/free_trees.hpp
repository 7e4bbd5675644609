#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "treemc/tree.hpp"

namespace treemc {

inline constexpr std::size_t kDefaultCatalogCap = 16;

/// One representative per isomorphism class of unrooted trees on `size`
/// vertices. Each representative is rooted at a centre with children in
/// canonical order; entries are sorted by canonical code.
struct FreeTreeCatalog {
  std::size_t size = 0;
  std::vector<ArenaTree> trees;
  std::vector<std::string> codes;
};

/// Vertices remaining after repeatedly stripping leaves: one or two.
std::vector<VertexId> tree_centers(const ArenaTree& t);

/// Parenthesis code of the subtree below `root` when t is viewed as an
/// unrooted tree, children ordered by code.
std::string rooted_code(const ArenaTree& t, VertexId root);

/// Isomorphism invariant of the unrooted tree: smallest rooted code over its
/// centres.
std::string canonical_code(const ArenaTree& t);

/// Inverse of rooted_code: breadth-first tree whose children appear in code
/// order.
ArenaTree tree_from_code(const std::string& code);

/// Grown by attaching a leaf to every vertex of every tree of size n - 1
/// and keeping one tree per canonical code. Throws ResourceError when
/// n > cap and std::invalid_argument when n == 0.
FreeTreeCatalog enumerate_free_trees(std::size_t n, std::size_t cap = kDefaultCatalogCap);

}  // namespace treemc
