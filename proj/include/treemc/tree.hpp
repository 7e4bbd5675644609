#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace treemc {

/// Dense index of a vertex inside one ArenaTree. The root is always 0.
using VertexId = std::size_t;

/// Word over positive integers locating a vertex in the Ulam-Harris-Neveu
/// tree; the root is the empty word.
using UhnLabel = std::vector<std::uint32_t>;

/// Immutable rooted ordered tree stored as index arrays.
///
/// Children of a vertex are ordered by increasing index, and a vertex's
/// label extends its parent's label by its 1-based rank among siblings.
/// Indices need not be in breadth-first order; bfs_order() provides one.
class ArenaTree {
 public:
  /// Single-vertex tree.
  ArenaTree();

  /// Builds from a parent array where parents[0] is empty (the root) and
  /// every other entry names a vertex. Throws std::invalid_argument if the
  /// array does not describe a tree rooted at 0.
  explicit ArenaTree(const std::vector<std::optional<VertexId>>& parents);

  /// Builds from an undirected edge list on vertices [0, n), rooted at 0.
  /// Vertex ids are preserved.
  static ArenaTree from_edges(std::size_t n, const std::vector<std::pair<VertexId, VertexId>>& edges);

  std::size_t size() const { return parent_.size(); }
  static constexpr VertexId root() { return 0; }

  std::optional<VertexId> parent(VertexId v) const;
  std::span<const VertexId> children(VertexId v) const;
  std::size_t height(VertexId v) const;
  const UhnLabel& label(VertexId v) const;
  std::size_t max_height() const { return max_height_; }

  /// Number of incident edges (children plus parent).
  std::size_t degree(VertexId v) const;
  bool is_leaf(VertexId v) const { return children(v).empty(); }

  /// Vertices in breadth-first order from the root; parents precede children.
  const std::vector<VertexId>& bfs_order() const { return bfs_; }

  const std::vector<std::optional<VertexId>>& parents() const { return parent_; }

  std::optional<VertexId> find(const UhnLabel& label) const;

  /// Throws std::invalid_argument unless v < size().
  void check_vertex(VertexId v) const;

 private:
  std::vector<std::optional<VertexId>> parent_;
  std::vector<std::vector<VertexId>> children_;
  std::vector<std::size_t> height_;
  std::vector<UhnLabel> label_;
  std::vector<VertexId> bfs_;
  std::size_t max_height_ = 0;
};

/// Deepest common ancestor; a vertex is its own ancestor.
VertexId lca(const ArenaTree& t, VertexId u, VertexId v);

/// Edge count of the unique u-v path: h(u) + h(v) - 2 h(lca).
std::size_t graph_distance(const ArenaTree& t, VertexId u, VertexId v);

/// max(h(u), h(v)) - h(lca(u, v)), the larger branch length below the
/// common ancestor. Lies between graph_distance / 2 and graph_distance.
std::size_t tilde_distance(const ArenaTree& t, VertexId u, VertexId v);

struct Generation {
  std::size_t n;
};
struct Truncation {
  std::size_t n;
};
struct Descendants {
  VertexId u;
};
using SliceSpec = std::variant<Generation, Truncation, Descendants>;

/// Vertex subsets in increasing index order. Empty results are legal.
std::vector<VertexId> slice(const ArenaTree& t, const SliceSpec& spec);
std::vector<VertexId> generation(const ArenaTree& t, std::size_t n);
std::vector<VertexId> truncation(const ArenaTree& t, std::size_t n);
std::vector<VertexId> descendants(const ArenaTree& t, VertexId u);

/// Undirected neighbour lists, each sorted by index.
std::vector<std::vector<VertexId>> neighbors(const ArenaTree& t);

/// Same unrooted tree re-rooted at `new_root`, relabelled in breadth-first
/// order so that new_root becomes vertex 0. `mapping`, if given, receives
/// old id -> new id.
ArenaTree reroot(const ArenaTree& t, VertexId new_root, std::vector<VertexId>* mapping = nullptr);

/// True when every vertex has total degree at most 2.
bool is_path(const ArenaTree& t);

/// {"parents": [null, 0, 0, 1, ...]} on one line.
std::string to_json(const ArenaTree& t);
ArenaTree tree_from_json(const std::string& text);

}  // namespace treemc
