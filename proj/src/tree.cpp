#include "treemc/tree.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "json.hpp"

namespace treemc {

ArenaTree::ArenaTree() : ArenaTree(std::vector<std::optional<VertexId>>{std::nullopt}) {}

ArenaTree::ArenaTree(const std::vector<std::optional<VertexId>>& parents) : parent_(parents) {
  const std::size_t n = parent_.size();
  if (n == 0) throw std::invalid_argument("ArenaTree: empty parent array");
  if (parent_[0].has_value()) throw std::invalid_argument("ArenaTree: vertex 0 must be the root");
  children_.assign(n, {});
  for (VertexId v = 1; v < n; ++v) {
    if (!parent_[v]) throw std::invalid_argument("ArenaTree: vertex " + std::to_string(v) + " has no parent");
    VertexId p = *parent_[v];
    if (p >= n || p == v) throw std::invalid_argument("ArenaTree: invalid parent for vertex " + std::to_string(v));
    children_[p].push_back(v);
  }

  height_.assign(n, 0);
  label_.assign(n, {});
  bfs_.reserve(n);
  bfs_.push_back(0);
  for (std::size_t head = 0; head < bfs_.size(); ++head) {
    VertexId w = bfs_[head];
    const auto& kids = children_[w];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      VertexId c = kids[i];
      height_[c] = height_[w] + 1;
      label_[c] = label_[w];
      label_[c].push_back(static_cast<std::uint32_t>(i + 1));
      bfs_.push_back(c);
    }
  }
  // Any vertex not reached from the root sits on a parent cycle.
  if (bfs_.size() != n) throw std::invalid_argument("ArenaTree: parent array contains a cycle");
  max_height_ = *std::max_element(height_.begin(), height_.end());
}

ArenaTree ArenaTree::from_edges(std::size_t n, const std::vector<std::pair<VertexId, VertexId>>& edges) {
  if (n == 0) throw std::invalid_argument("from_edges: empty tree");
  if (edges.size() != n - 1) throw std::invalid_argument("from_edges: a tree on n vertices has n-1 edges");
  std::vector<std::vector<VertexId>> adj(n);
  for (auto [a, b] : edges) {
    if (a >= n || b >= n || a == b) throw std::invalid_argument("from_edges: invalid edge");
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<std::optional<VertexId>> parents(n);
  std::vector<bool> seen(n, false);
  std::deque<VertexId> queue{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!queue.empty()) {
    VertexId w = queue.front();
    queue.pop_front();
    for (VertexId x : adj[w]) {
      if (seen[x]) continue;
      seen[x] = true;
      parents[x] = w;
      queue.push_back(x);
      ++reached;
    }
  }
  if (reached != n) throw std::invalid_argument("from_edges: edges do not connect all vertices");
  return ArenaTree(parents);
}

void ArenaTree::check_vertex(VertexId v) const {
  if (v >= size()) {
    throw std::invalid_argument("vertex " + std::to_string(v) + " out of range for tree of size " +
                                std::to_string(size()));
  }
}

std::optional<VertexId> ArenaTree::parent(VertexId v) const {
  check_vertex(v);
  return parent_[v];
}

std::span<const VertexId> ArenaTree::children(VertexId v) const {
  check_vertex(v);
  return children_[v];
}

std::size_t ArenaTree::height(VertexId v) const {
  check_vertex(v);
  return height_[v];
}

const UhnLabel& ArenaTree::label(VertexId v) const {
  check_vertex(v);
  return label_[v];
}

std::size_t ArenaTree::degree(VertexId v) const {
  check_vertex(v);
  return children_[v].size() + (parent_[v] ? 1 : 0);
}

std::optional<VertexId> ArenaTree::find(const UhnLabel& label) const {
  VertexId w = root();
  for (std::uint32_t rank : label) {
    if (rank == 0 || rank > children_[w].size()) return std::nullopt;
    w = children_[w][rank - 1];
  }
  return w;
}

VertexId lca(const ArenaTree& t, VertexId u, VertexId v) {
  t.check_vertex(u);
  t.check_vertex(v);
  while (t.height(u) > t.height(v)) u = *t.parent(u);
  while (t.height(v) > t.height(u)) v = *t.parent(v);
  while (u != v) {
    u = *t.parent(u);
    v = *t.parent(v);
  }
  return u;
}

std::size_t graph_distance(const ArenaTree& t, VertexId u, VertexId v) {
  VertexId w = lca(t, u, v);
  return t.height(u) + t.height(v) - 2 * t.height(w);
}

std::size_t tilde_distance(const ArenaTree& t, VertexId u, VertexId v) {
  VertexId w = lca(t, u, v);
  return std::max(t.height(u), t.height(v)) - t.height(w);
}

std::vector<VertexId> generation(const ArenaTree& t, std::size_t n) {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < t.size(); ++v)
    if (t.height(v) == n) out.push_back(v);
  return out;
}

std::vector<VertexId> truncation(const ArenaTree& t, std::size_t n) {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < t.size(); ++v)
    if (t.height(v) <= n) out.push_back(v);
  return out;
}

std::vector<VertexId> descendants(const ArenaTree& t, VertexId u) {
  t.check_vertex(u);
  std::vector<VertexId> out{u};
  for (std::size_t head = 0; head < out.size(); ++head)
    for (VertexId c : t.children(out[head])) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<VertexId> slice(const ArenaTree& t, const SliceSpec& spec) {
  struct Visitor {
    const ArenaTree& t;
    std::vector<VertexId> operator()(const Generation& g) const { return generation(t, g.n); }
    std::vector<VertexId> operator()(const Truncation& g) const { return truncation(t, g.n); }
    std::vector<VertexId> operator()(const Descendants& d) const { return descendants(t, d.u); }
  };
  return std::visit(Visitor{t}, spec);
}

std::vector<std::vector<VertexId>> neighbors(const ArenaTree& t) {
  std::vector<std::vector<VertexId>> adj(t.size());
  for (VertexId v = 1; v < t.size(); ++v) {
    VertexId p = *t.parent(v);
    adj[v].push_back(p);
    adj[p].push_back(v);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

ArenaTree reroot(const ArenaTree& t, VertexId new_root, std::vector<VertexId>* mapping) {
  t.check_vertex(new_root);
  const auto adj = neighbors(t);
  std::vector<VertexId> new_id(t.size(), t.size());
  std::vector<std::optional<VertexId>> parents;
  parents.reserve(t.size());
  std::vector<VertexId> order{new_root};
  new_id[new_root] = 0;
  parents.push_back(std::nullopt);
  for (std::size_t head = 0; head < order.size(); ++head) {
    VertexId w = order[head];
    for (VertexId x : adj[w]) {
      if (new_id[x] != t.size()) continue;
      new_id[x] = order.size();
      order.push_back(x);
      parents.push_back(new_id[w]);
    }
  }
  if (mapping) *mapping = new_id;
  return ArenaTree(parents);
}

bool is_path(const ArenaTree& t) {
  for (VertexId v = 0; v < t.size(); ++v)
    if (t.degree(v) > 2) return false;
  return true;
}

std::string to_json(const ArenaTree& t) {
  nlohmann::json parents = nlohmann::json::array();
  for (const auto& p : t.parents()) {
    if (p)
      parents.push_back(*p);
    else
      parents.push_back(nullptr);
  }
  return nlohmann::json{{"parents", parents}}.dump();
}

ArenaTree tree_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("tree JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("parents") || !doc["parents"].is_array())
    throw std::invalid_argument("tree JSON: expected an object with a \"parents\" array");
  std::vector<std::optional<VertexId>> parents;
  for (const auto& entry : doc["parents"]) {
    if (entry.is_null())
      parents.emplace_back(std::nullopt);
    else if (entry.is_number_unsigned())
      parents.emplace_back(entry.get<VertexId>());
    else
      throw std::invalid_argument("tree JSON: parents must be null or nonnegative integers");
  }
  return ArenaTree(parents);
}

}  // namespace treemc
