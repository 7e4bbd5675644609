#include "treemc/free_trees.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "treemc/errors.hpp"

namespace treemc {

std::vector<VertexId> tree_centers(const ArenaTree& t) {
  const std::size_t n = t.size();
  if (n <= 2) {
    std::vector<VertexId> all(n);
    for (VertexId v = 0; v < n; ++v) all[v] = v;
    return all;
  }
  const auto adj = neighbors(t);
  std::vector<std::size_t> deg(n);
  std::vector<VertexId> layer;
  for (VertexId v = 0; v < n; ++v) {
    deg[v] = adj[v].size();
    if (deg[v] == 1) layer.push_back(v);
  }
  std::size_t remaining = n;
  while (remaining > 2) {
    remaining -= layer.size();
    std::vector<VertexId> next;
    for (VertexId leaf : layer) {
      deg[leaf] = 0;
      for (VertexId w : adj[leaf])
        if (deg[w] > 0 && --deg[w] == 1) next.push_back(w);
    }
    layer = std::move(next);
  }
  std::sort(layer.begin(), layer.end());
  return layer;
}

std::string rooted_code(const ArenaTree& t, VertexId root) {
  t.check_vertex(root);
  const auto adj = neighbors(t);
  std::vector<VertexId> order{root}, from(t.size(), t.size());
  from[root] = root;
  for (std::size_t head = 0; head < order.size(); ++head)
    for (VertexId x : adj[order[head]])
      if (from[x] == t.size()) {
        from[x] = order[head];
        order.push_back(x);
      }
  std::vector<std::vector<std::string>> parts(t.size());
  std::vector<std::string> code(t.size());
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto& kids = parts[*it];
    std::sort(kids.begin(), kids.end());
    std::string s = "(";
    for (auto& k : kids) s += k;
    s += ")";
    if (*it != root) parts[from[*it]].push_back(std::move(s));
    else code[root] = std::move(s);
    kids.clear();
  }
  return code[root];
}

std::string canonical_code(const ArenaTree& t) {
  std::string best;
  for (VertexId c : tree_centers(t)) {
    std::string s = rooted_code(t, c);
    if (best.empty() || s < best) best = std::move(s);
  }
  return best;
}

ArenaTree tree_from_code(const std::string& code) {
  if (code.size() < 2 || code.front() != '(' || code.back() != ')')
    throw std::invalid_argument("tree code must be a balanced parenthesis string");
  // Depth-first pass records each vertex's parent and child order; the
  // breadth-first relabelling then keeps children in code order.
  std::vector<std::vector<std::size_t>> kids{{}};
  std::vector<std::size_t> stack{0};
  for (std::size_t i = 1; i + 1 < code.size(); ++i) {
    if (code[i] == '(') {
      std::size_t id = kids.size();
      kids.emplace_back();
      if (stack.empty()) throw std::invalid_argument("tree code is not balanced");
      kids[stack.back()].push_back(id);
      stack.push_back(id);
    } else if (code[i] == ')') {
      if (stack.size() <= 1) throw std::invalid_argument("tree code is not balanced");
      stack.pop_back();
    } else {
      throw std::invalid_argument("tree code may only contain parentheses");
    }
  }
  if (stack.size() != 1) throw std::invalid_argument("tree code is not balanced");
  std::vector<std::optional<VertexId>> parents{std::nullopt};
  std::vector<std::size_t> order{0};
  for (std::size_t head = 0; head < order.size(); ++head)
    for (std::size_t c : kids[order[head]]) {
      parents.push_back(head);
      order.push_back(c);
    }
  return ArenaTree(parents);
}

FreeTreeCatalog enumerate_free_trees(std::size_t n, std::size_t cap) {
  if (n == 0) throw std::invalid_argument("enumerate_free_trees: n must be >= 1");
  if (n > cap)
    throw ResourceError("enumerate_free_trees: n = " + std::to_string(n) + " exceeds the catalog cap " +
                        std::to_string(cap));
  std::vector<std::string> codes{"()"};
  for (std::size_t size = 2; size <= n; ++size) {
    std::set<std::string> next;
    for (const auto& code : codes) {
      ArenaTree base = tree_from_code(code);
      auto parents = base.parents();
      for (VertexId v = 0; v < base.size(); ++v) {
        parents.push_back(v);
        next.insert(canonical_code(ArenaTree(parents)));
        parents.pop_back();
      }
    }
    codes.assign(next.begin(), next.end());
  }
  FreeTreeCatalog out;
  out.size = n;
  out.codes = codes;
  for (const auto& code : codes) out.trees.push_back(tree_from_code(code));
  return out;
}

}  // namespace treemc
