#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "treemc/rng.hpp"
#include "treemc/tree.hpp"

namespace treemc {

/// Default ceiling on generated tree sizes.
inline constexpr std::size_t kDefaultVertexCap = std::size_t{1} << 24;

struct CompleteDary {
  std::size_t arity;
  std::size_t depth;
};
/// Root has arity + 1 children, every other internal vertex has arity.
struct Bethe {
  std::size_t arity;
  std::size_t depth;
};
/// Path of n vertices rooted at one end.
struct Line {
  std::size_t n;
};
/// Centre with n - 1 leaves, rooted at the centre.
struct Star {
  std::size_t n;
};
/// Two adjacent centres, each carrying two leaves.
struct DoubleCherry {};

using FamilySpec = std::variant<CompleteDary, Bethe, Line, Star, DoubleCherry>;

/// Builds one of the deterministic families in breadth-first index order.
/// Throws ResourceError when the tree would exceed `vertex_cap`.
ArenaTree deterministic_family(const FamilySpec& spec, std::size_t vertex_cap = kDefaultVertexCap);

/// Every vertex at height i has degrees[i] children; leaves sit at height
/// degrees.size().
ArenaTree spherically_symmetric(const std::vector<std::size_t>& degrees,
                                std::size_t vertex_cap = kDefaultVertexCap);

/// Centre vertex 0 with one path ("leg") per entry of `legs`, legs built in
/// order. Useful for exercising rewiring moves.
ArenaTree spider(const std::vector<std::size_t>& legs);

/// Uniform labelled tree on n vertices, decoded from a random Prufer
/// sequence and rooted at vertex 0.
ArenaTree random_labelled_tree(std::size_t n, Rng& rng);

/// Labelled tree encoded by a Prufer sequence over [0, seq.size() + 2).
ArenaTree tree_from_prufer(const std::vector<std::size_t>& seq);

}  // namespace treemc
