#include "treemc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "treemc/generators.hpp"

namespace treemc {
namespace {

using Adjacency = std::vector<std::set<VertexId>>;

// Distance counts from `root` inside the component that avoids `blocked`.
std::vector<std::uint64_t> distance_counts(const std::vector<std::vector<VertexId>>& adj, VertexId root,
                                           VertexId blocked) {
  std::vector<std::size_t> dist(adj.size(), adj.size());
  std::vector<VertexId> queue{root};
  dist[root] = 0;
  std::vector<std::uint64_t> counts;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    VertexId w = queue[head];
    if (counts.size() <= dist[w]) counts.resize(dist[w] + 1, 0);
    ++counts[dist[w]];
    for (VertexId x : adj[w])
      if (x != blocked && dist[x] == adj.size()) {
        dist[x] = dist[w] + 1;
        queue.push_back(x);
      }
  }
  return counts;
}

Rational horner(const std::vector<std::uint64_t>& coeffs, const Rational& x) {
  Rational acc = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + Rational(*it);
  return acc;
}

ArenaTree component(const std::vector<std::vector<VertexId>>& adj, VertexId root, VertexId blocked) {
  std::vector<VertexId> order{root}, id(adj.size(), adj.size());
  std::vector<std::optional<VertexId>> parents{std::nullopt};
  id[root] = 0;
  for (std::size_t head = 0; head < order.size(); ++head)
    for (VertexId x : adj[order[head]])
      if (x != blocked && id[x] == adj.size()) {
        id[x] = order.size();
        order.push_back(x);
        parents.push_back(head);
      }
  return ArenaTree(parents);
}

std::vector<std::vector<VertexId>> as_lists(const Adjacency& adj) {
  std::vector<std::vector<VertexId>> out;
  for (const auto& s : adj) out.emplace_back(s.begin(), s.end());
  return out;
}

Rational profile_of(const Adjacency& adj, VertexId root, VertexId blocked, const Rational& alpha) {
  return horner(distance_counts(as_lists(adj), root, blocked), alpha);
}

struct Editor {
  Adjacency adj;
  std::vector<std::pair<VertexId, VertexId>> removed, added;

  void remove(VertexId a, VertexId b) {
    adj[a].erase(b);
    adj[b].erase(a);
    removed.emplace_back(a, b);
  }
  void add(VertexId a, VertexId b) {
    adj[a].insert(b);
    adj[b].insert(a);
    added.emplace_back(a, b);
  }
  ArenaTree build() const {
    std::vector<std::pair<VertexId, VertexId>> edges;
    for (VertexId a = 0; a < adj.size(); ++a)
      for (VertexId b : adj[a])
        if (a < b) edges.emplace_back(a, b);
    return ArenaTree::from_edges(adj.size(), edges);
  }
};

Rational hosoya_difference(const ArenaTree& before, const ArenaTree& after, const Rational& alpha) {
  const HosoyaPolynomial hb = hosoya_polynomial(before), ha = hosoya_polynomial(after);
  const auto& a = hb.coefficients();
  const auto& b = ha.coefficients();
  std::vector<std::int64_t> diff(std::max(a.size(), b.size()), 0);
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] += static_cast<std::int64_t>(a[i]);
  for (std::size_t i = 0; i < b.size(); ++i) diff[i] -= static_cast<std::int64_t>(b[i]);
  Rational acc = 0;
  for (auto it = diff.rbegin(); it != diff.rend(); ++it) acc = acc * alpha + Rational(*it);
  return acc;
}

std::string name(VertexId v) { return std::to_string(v); }

}  // namespace

Minimizers<Rational> hosoya_minimizers(const FreeTreeCatalog& catalog, const Rational& alpha) {
  Minimizers<Rational> out;
  for (std::size_t i = 0; i < catalog.trees.size(); ++i) {
    Rational h = hosoya_polynomial(catalog.trees[i])(alpha);
    if (out.indices.empty() || h < out.value) {
      out.value = h;
      out.indices = {i};
    } else if (h == out.value) {
      out.indices.push_back(i);
    }
  }
  return out;
}

Minimizers<double> hosoya_minimizers(const FreeTreeCatalog& catalog, double alpha) {
  std::vector<double> values;
  for (const auto& t : catalog.trees) values.push_back(hosoya_polynomial(t)(alpha));
  Minimizers<double> out;
  if (values.empty()) return out;
  out.value = *std::min_element(values.begin(), values.end());
  const double tol = 1e-12 * std::max(1.0, std::abs(out.value));
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] - out.value <= tol) out.indices.push_back(i);
  return out;
}

std::uint64_t bipartite_imbalance(const ArenaTree& t) {
  std::int64_t even = 0, odd = 0;
  for (VertexId v = 0; v < t.size(); ++v) (t.height(v) % 2 == 0 ? even : odd) += 1;
  std::int64_t d = even - odd;
  return static_cast<std::uint64_t>(d * d);
}

std::vector<std::uint64_t> rooted_profile_coefficients(const ArenaTree& t, VertexId root) {
  t.check_vertex(root);
  return distance_counts(neighbors(t), root, t.size());
}

Rational rooted_profile(const ArenaTree& t, VertexId root, const Rational& alpha) {
  return horner(rooted_profile_coefficients(t, root), alpha);
}

std::pair<ArenaTree, ArenaTree> split_at_edge(const ArenaTree& t, VertexId u, VertexId v) {
  t.check_vertex(u);
  t.check_vertex(v);
  if (t.parent(u) != v && t.parent(v) != u) throw std::invalid_argument("split_at_edge: vertices are not adjacent");
  const auto adj = neighbors(t);
  return {component(adj, u, v), component(adj, v, u)};
}

double rooted_line_profile(std::size_t k, std::size_t j, double alpha) {
  if (j < 1 || j > k) throw std::invalid_argument("rooted_line_profile: need 1 <= j <= k");
  if (alpha == 1.0) throw std::invalid_argument("rooted_line_profile: alpha = 1 is excluded");
  return (1.0 + alpha - std::pow(alpha, static_cast<double>(j)) - std::pow(alpha, static_cast<double>(k - j + 1))) /
         (1.0 - alpha);
}

Rational rooted_line_profile(std::size_t k, std::size_t j, const Rational& alpha) {
  if (j < 1 || j > k) throw std::invalid_argument("rooted_line_profile: need 1 <= j <= k");
  if (alpha == 1) throw std::invalid_argument("rooted_line_profile: alpha = 1 is excluded");
  auto power = [&](std::size_t e) {
    Rational p = 1;
    for (std::size_t i = 0; i < e; ++i) p *= alpha;
    return p;
  };
  return (1 + alpha - power(j) - power(k - j + 1)) / (1 - alpha);
}

std::string to_string(MoveCase c) {
  switch (c) {
    case MoveCase::Case1:
      return "case1";
    case MoveCase::Case2:
      return "case2";
    case MoveCase::Case3a:
      return "case3a";
    case MoveCase::Case3b:
      return "case3b";
  }
  return "unknown";
}

MoveCase move_case_from_string(const std::string& name) {
  for (MoveCase c : {MoveCase::Case1, MoveCase::Case2, MoveCase::Case3a, MoveCase::Case3b})
    if (to_string(c) == name) return c;
  throw std::invalid_argument("unknown move case '" + name + "'");
}

ArenaTree random_move_instance(std::size_t n, Rng& rng) {
  if (n < 4) throw std::invalid_argument("random_move_instance: n must be >= 4");
  const std::size_t leaves = 2 + static_cast<std::size_t>(rng.below(std::min<std::size_t>(4, n - 4) + 1));
  const std::size_t rest = n - 1 - leaves;
  const std::size_t core = 1 + static_cast<std::size_t>(rng.below(rest));
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId x = 1; x <= leaves; ++x) edges.emplace_back(0, x);
  const VertexId base = leaves + 1;
  const ArenaTree r = random_labelled_tree(core, rng);
  for (VertexId x = 1; x < core; ++x) edges.emplace_back(base + *r.parent(x), base + x);
  const VertexId v = base + static_cast<VertexId>(rng.below(core));
  edges.emplace_back(0, v);
  for (VertexId x = base + core; x < n; ++x) edges.emplace_back(v, x);
  return ArenaTree::from_edges(n, edges);
}

MoveOutcome proof_move(const ArenaTree& t, MoveCase which, const Rational& alpha) {
  if (is_path(t)) return MoveRefusal{"input is the line graph; no move applies"};
  const std::size_t n = t.size();
  Editor ed;
  ed.adj.resize(n);
  for (VertexId v = 1; v < n; ++v) {
    ed.adj[v].insert(*t.parent(v));
    ed.adj[*t.parent(v)].insert(v);
  }
  const Adjacency& adj = ed.adj;
  auto deg = [&](VertexId v) { return adj[v].size(); };

  MoveResult res{ArenaTree(), {}, {}, 0, 0, ""};

  if (which == MoveCase::Case1) {
    if (!(alpha > 0 && alpha < 1)) return MoveRefusal{"0 < alpha < 1 required for case1"};
    VertexId u1 = 0;
    while (deg(u1) != 1) ++u1;
    VertexId prev = n, cur = u1;
    std::vector<VertexId> down;
    for (;;) {
      down.clear();
      for (VertexId x : adj[cur])
        if (x != prev) down.push_back(x);
      if (down.size() != 1) break;
      prev = cur;
      cur = down[0];
    }
    const VertexId branch = cur, v = down.front();
    ed.remove(branch, v);
    ed.add(u1, v);
    res.description = "moved the branch at " + name(v) + " from the first branching vertex " + name(branch) +
                      " to the leaf " + name(u1);
  } else {
    if (!(alpha > -1 && alpha < 0)) return MoveRefusal{"-1 < alpha < 0 required for " + to_string(which)};
    std::vector<VertexId> inner;
    for (VertexId w = 0; w < n; ++w)
      if (deg(w) >= 2) inner.push_back(w);
    VertexId u = n, v = n;
    std::vector<VertexId> leaves;
    if (inner.size() == 1) {
      u = inner[0];
      leaves.assign(adj[u].begin(), adj[u].end());
      v = leaves.front();
      leaves.erase(leaves.begin());
    } else {
      for (VertexId w : inner) {
        std::vector<VertexId> inner_nb;
        for (VertexId x : adj[w])
          if (deg(x) >= 2) inner_nb.push_back(x);
        if (inner_nb.size() == 1) {
          u = w;
          v = inner_nb[0];
          break;
        }
      }
      for (VertexId x : adj[u])
        if (deg(x) == 1) leaves.push_back(x);
    }
    const std::size_t ell = leaves.size() - 1;
    if (ell < 1)
      return MoveRefusal{"l >= 1 required: the non-protected vertex has a single leaf neighbour"};
    const Rational c_v = profile_of(adj, v, u, alpha);

    if (which == MoveCase::Case2) {
      if (!(c_v > 0)) return MoveRefusal{"C_{T_v}(alpha) > 0 required for case2"};
      for (std::size_t i = 1; i <= ell; ++i) {
        ed.remove(u, leaves[i]);
        ed.add(leaves[i - 1], leaves[i]);
      }
      res.description = "replaced the star at " + name(u) + " by a path of " + std::to_string(ell + 2) +
                        " vertices hanging from " + name(v);
    } else {
      if (c_v > 0) return MoveRefusal{"C_{T_v}(alpha) <= 0 required for " + to_string(which)};
      std::vector<VertexId> vs;
      std::vector<Rational> cs;
      for (VertexId x : adj[v])
        if (x != u) {
          vs.push_back(x);
          cs.push_back(profile_of(adj, x, v, alpha));
        }
      std::size_t first = vs.size();
      for (std::size_t i = 0; i < vs.size(); ++i)
        if (cs[i] > 0) {
          first = i;
          break;
        }
      if (first == vs.size()) return MoveRefusal{"no neighbour v_1 of v with C_{T_{v_1}}(alpha) > 0"};
      const VertexId v1 = vs[first];
      Rational rest = 0;
      for (std::size_t i = 0; i < vs.size(); ++i)
        if (i != first) rest += cs[i];
      const Rational gap = alpha * alpha - alpha * alpha * alpha * alpha;
      if (which == MoveCase::Case3a) {
        if (!(rest > 0)) return MoveRefusal{"sum of C_{T_{v_i}}(alpha) over i >= 2 must be > 0 for case3a"};
        ed.remove(v1, v);
        ed.add(v1, leaves[0]);
        res.bound = 2 * cs[first] * rest * gap;
        res.description = "grafted the branch at " + name(v1) + " from " + name(v) + " onto the leaf " + name(leaves[0]);
      } else {
        if (rest > 0) return MoveRefusal{"sum of C_{T_{v_i}}(alpha) over i >= 2 must be <= 0 for case3b"};
        for (std::size_t i = 1; i <= ell; ++i) {
          ed.remove(leaves[i], u);
          ed.add(leaves[i], v1);
        }
        res.bound = 2 * Rational(ell) * gap;
        res.description = "moved " + std::to_string(ell) + " leaves of " + name(u) + " onto " + name(v1);
      }
    }
  }
  res.rewritten = ed.build();
  res.removed_edges = ed.removed;
  res.added_edges = ed.added;
  res.delta = hosoya_difference(t, res.rewritten, alpha);
  return res;
}

}  // namespace treemc
