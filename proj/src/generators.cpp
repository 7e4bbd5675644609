#include "treemc/generators.hpp"

#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

#include "treemc/errors.hpp"

namespace treemc {
namespace {

void check_cap(std::size_t count, std::size_t cap) {
  if (count > cap)
    throw ResourceError("tree would have " + std::to_string(count) + " vertices, cap is " + std::to_string(cap));
}

std::size_t checked_mul(std::size_t a, std::size_t b, std::size_t cap) {
  if (b != 0 && a > std::numeric_limits<std::size_t>::max() / b) throw ResourceError("tree size overflows");
  std::size_t r = a * b;
  check_cap(r, cap);
  return r;
}

// Level-by-level construction; out_degree(height) gives the fan-out.
template <typename OutDegree>
ArenaTree build_levels(std::size_t depth, OutDegree out_degree, std::size_t cap) {
  std::vector<std::optional<VertexId>> parents{std::nullopt};
  std::size_t level_begin = 0, level_end = 1;
  for (std::size_t h = 0; h < depth; ++h) {
    std::size_t fan = out_degree(h);
    std::size_t next = checked_mul(level_end - level_begin, fan, cap);
    check_cap(parents.size() + next, cap);
    for (std::size_t w = level_begin; w < level_end; ++w)
      for (std::size_t i = 0; i < fan; ++i) parents.emplace_back(w);
    level_begin = level_end;
    level_end = parents.size();
    if (level_begin == level_end) break;
  }
  return ArenaTree(parents);
}

}  // namespace

ArenaTree deterministic_family(const FamilySpec& spec, std::size_t vertex_cap) {
  struct Visitor {
    std::size_t cap;
    ArenaTree operator()(const CompleteDary& s) const {
      if (s.arity < 1) throw std::invalid_argument("complete_dary: arity must be >= 1");
      return build_levels(s.depth, [&](std::size_t) { return s.arity; }, cap);
    }
    ArenaTree operator()(const Bethe& s) const {
      if (s.arity < 1) throw std::invalid_argument("bethe: arity must be >= 1");
      return build_levels(s.depth, [&](std::size_t h) { return h == 0 ? s.arity + 1 : s.arity; }, cap);
    }
    ArenaTree operator()(const Line& s) const {
      if (s.n < 1) throw std::invalid_argument("line: n must be >= 1");
      check_cap(s.n, cap);
      return build_levels(s.n - 1, [](std::size_t) { return std::size_t{1}; }, cap);
    }
    ArenaTree operator()(const Star& s) const {
      if (s.n < 1) throw std::invalid_argument("star: n must be >= 1");
      check_cap(s.n, cap);
      return build_levels(s.n > 1 ? 1 : 0, [&](std::size_t) { return s.n - 1; }, cap);
    }
    ArenaTree operator()(const DoubleCherry&) const {
      return ArenaTree(std::vector<std::optional<VertexId>>{std::nullopt, 0, 0, 0, 1, 1});
    }
  };
  return std::visit(Visitor{vertex_cap}, spec);
}

ArenaTree spherically_symmetric(const std::vector<std::size_t>& degrees, std::size_t vertex_cap) {
  for (std::size_t d : degrees)
    if (d < 1) throw std::invalid_argument("spherically_symmetric: degrees must be >= 1");
  return build_levels(degrees.size(), [&](std::size_t h) { return degrees[h]; }, vertex_cap);
}

ArenaTree spider(const std::vector<std::size_t>& legs) {
  std::vector<std::optional<VertexId>> parents{std::nullopt};
  for (std::size_t len : legs) {
    VertexId prev = 0;
    for (std::size_t i = 0; i < len; ++i) {
      parents.emplace_back(prev);
      prev = parents.size() - 1;
    }
  }
  return ArenaTree(parents);
}

ArenaTree tree_from_prufer(const std::vector<std::size_t>& seq) {
  const std::size_t n = seq.size() + 2;
  std::vector<std::size_t> deg(n, 1);
  for (std::size_t x : seq) {
    if (x >= n) throw std::invalid_argument("Prufer entry out of range");
    ++deg[x];
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> leaves;
  for (std::size_t v = 0; v < n; ++v)
    if (deg[v] == 1) leaves.push(v);
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (std::size_t x : seq) {
    std::size_t leaf = leaves.top();
    leaves.pop();
    edges.emplace_back(leaf, x);
    if (--deg[x] == 1) leaves.push(x);
  }
  std::size_t a = leaves.top();
  leaves.pop();
  edges.emplace_back(a, leaves.top());
  return ArenaTree::from_edges(n, edges);
}

ArenaTree random_labelled_tree(std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("random_labelled_tree: n must be >= 1");
  if (n == 1) return ArenaTree();
  if (n == 2) return ArenaTree({std::nullopt, 0});
  std::vector<std::size_t> seq(n - 2);
  for (auto& x : seq) x = static_cast<std::size_t>(rng.below(n));
  return tree_from_prufer(seq);
}

}  // namespace treemc
