#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "treemc/generators.hpp"
#include "treemc/tree.hpp"

using namespace treemc;

namespace {

VertexId at(const ArenaTree& t, UhnLabel label) { return t.find(label).value(); }

}  // namespace

TEST_CASE("construction validates the parent array") {
  CHECK_THROWS_AS(ArenaTree(std::vector<std::optional<VertexId>>{}), std::invalid_argument);
  CHECK_THROWS_AS(ArenaTree({0}), std::invalid_argument);
  CHECK_THROWS_AS(ArenaTree({std::nullopt, 5}), std::invalid_argument);
  CHECK_THROWS_AS(ArenaTree({std::nullopt, std::nullopt}), std::invalid_argument);
  // 1 -> 2 -> 1 never reaches the root
  CHECK_THROWS_AS(ArenaTree({std::nullopt, 2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(ArenaTree({std::nullopt, 1}), std::invalid_argument);
}

TEST_CASE("heights, children and labels are consistent") {
  ArenaTree t({std::nullopt, 0, 0, 1, 1, 2, 4});
  CHECK(t.size() == 7);
  CHECK(t.root() == 0);
  CHECK(t.label(0).empty());
  CHECK(t.label(4) == UhnLabel{1, 2});
  CHECK(t.label(6) == UhnLabel{1, 2, 1});
  CHECK(t.max_height() == 3);
  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 20; ++rep) {
    ArenaTree r = oracle::random_tree(80, gen);
    for (VertexId v = 0; v < r.size(); ++v) {
      CHECK(r.height(v) == oracle::naive_height(r, v));
      CHECK(r.find(r.label(v)) == v);
      if (v == 0) continue;
      VertexId p = *r.parent(v);
      CHECK(r.height(v) == r.height(p) + 1);
      auto kids = r.children(p);
      CHECK(std::count(kids.begin(), kids.end(), v) == 1);
      UhnLabel expect = r.label(p);
      expect.push_back(static_cast<std::uint32_t>(std::find(kids.begin(), kids.end(), v) - kids.begin() + 1));
      CHECK(r.label(v) == expect);
    }
  }
  CHECK_FALSE(t.find({3}).has_value());
  CHECK_FALSE(t.find({0}).has_value());
}

TEST_CASE("lca, distance and tilde distance on the complete binary tree") {
  ArenaTree t = deterministic_family(CompleteDary{2, 3});
  const VertexId u11 = at(t, {1, 1}), u12 = at(t, {1, 2}), u122 = at(t, {1, 2, 2}), u111 = at(t, {1, 1, 1});
  CHECK(lca(t, u11, u12) == at(t, {1}));
  CHECK(lca(t, u11, u11) == u11);
  for (VertexId v = 0; v < t.size(); ++v) CHECK(lca(t, 0, v) == 0);
  CHECK(graph_distance(t, u11, u11) == 0);
  CHECK(graph_distance(t, u11, u122) == 3);
  CHECK(graph_distance(t, 0, u111) == 3);
  CHECK(tilde_distance(t, u11, u122) == 2);
  CHECK(tilde_distance(t, u11, u11) == 0);
  for (VertexId v = 0; v < t.size(); ++v) CHECK(tilde_distance(t, 0, v) == t.height(v));
  CHECK_THROWS_AS(lca(t, 0, 99), std::invalid_argument);
  CHECK_THROWS_AS(graph_distance(t, 99, 0), std::invalid_argument);
  CHECK_THROWS_AS(t.height(15), std::invalid_argument);
}

TEST_CASE("graph distance is a metric matching the path-walk oracle") {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 6; ++rep) {
    ArenaTree t = oracle::random_tree(200, gen);
    const auto adj = oracle::adjacency(t);
    std::vector<std::vector<std::size_t>> bfs;
    for (VertexId v = 0; v < t.size(); ++v) bfs.push_back(oracle::bfs_distances(adj, v));
    std::uniform_int_distribution<VertexId> pick(0, t.size() - 1);
    for (int k = 0; k < 2000; ++k) {
      VertexId u = pick(gen), v = pick(gen), w = pick(gen);
      const std::size_t d = graph_distance(t, u, v);
      CHECK(d == bfs[u][v]);
      CHECK(d == graph_distance(t, v, u));
      CHECK((d == 0) == (u == v));
      CHECK(d <= graph_distance(t, u, w) + graph_distance(t, w, v));
      const std::size_t dt = tilde_distance(t, u, v);
      CHECK(2 * dt >= d);
      CHECK(dt <= d);
      auto path = oracle::path_walk(t, u, v);
      CHECK(path.size() == d + 1);
      CHECK(std::find(path.begin(), path.end(), lca(t, u, v)) != path.end());
      CHECK(lca(t, u, v) == oracle::naive_lca(t, u, v));
    }
  }
}

TEST_CASE("generation, truncation and descendant slices") {
  ArenaTree t = deterministic_family(CompleteDary{2, 4});
  CHECK(slice(t, Generation{0}) == std::vector<VertexId>{0});
  CHECK(generation(t, 3).size() == 8);
  CHECK(truncation(t, 3).size() == 15);
  CHECK(generation(t, 9).empty());
  const VertexId u1 = at(t, {1});
  auto desc = slice(t, Descendants{u1});
  CHECK(desc.size() == 15);
  for (VertexId v : desc) CHECK(lca(t, u1, v) == u1);
  CHECK(descendants(t, at(t, {2, 1, 1, 1})) == std::vector<VertexId>{at(t, {2, 1, 1, 1})});
  CHECK_THROWS_AS(descendants(t, 99), std::invalid_argument);

  std::mt19937_64 gen(3);
  ArenaTree r = oracle::random_tree(150, gen);
  std::size_t total = 0;
  std::vector<VertexId> acc;
  for (std::size_t n = 0; n <= r.max_height(); ++n) {
    auto g = generation(r, n);
    total += g.size();
    acc.insert(acc.end(), g.begin(), g.end());
    std::sort(acc.begin(), acc.end());
    CHECK(truncation(r, n) == acc);
  }
  CHECK(total == r.size());
}

TEST_CASE("rerooting keeps the unrooted shape") {
  std::mt19937_64 gen(5);
  ArenaTree t = oracle::random_tree(60, gen);
  std::vector<VertexId> map;
  ArenaTree r = reroot(t, 17, &map);
  CHECK(map[17] == 0);
  CHECK(r.size() == t.size());
  for (VertexId u = 0; u < t.size(); u += 3)
    for (VertexId v = 0; v < t.size(); v += 5) CHECK(graph_distance(r, map[u], map[v]) == graph_distance(t, u, v));
}

TEST_CASE("edge-list construction and path detection") {
  ArenaTree t = ArenaTree::from_edges(4, {{2, 3}, {0, 2}, {1, 0}});
  CHECK(t.parent(2) == 0);
  CHECK(t.parent(3) == 2);
  CHECK(is_path(t));
  CHECK_FALSE(is_path(deterministic_family(Star{4})));
  CHECK_THROWS_AS(ArenaTree::from_edges(3, {{0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(ArenaTree::from_edges(4, {{0, 1}, {1, 0}, {2, 3}}), std::invalid_argument);
  CHECK(neighbors(t)[0] == std::vector<VertexId>{1, 2});
}

TEST_CASE("json round trip") {
  ArenaTree t({std::nullopt, 0, 0, 1});
  const std::string s = to_json(t);
  CHECK(s == R"({"parents":[null,0,0,1]})");
  CHECK(s.find('\n') == std::string::npos);
  ArenaTree back = tree_from_json(s);
  CHECK(back.parents() == t.parents());
  CHECK(back.label(3) == UhnLabel{1, 1});
  CHECK_THROWS_AS(tree_from_json("{\"parents\": [0]}"), std::invalid_argument);
  CHECK_THROWS_AS(tree_from_json("[1,2"), std::invalid_argument);
  CHECK_THROWS_AS(tree_from_json("{\"parents\": [null, -1]}"), std::invalid_argument);
}
