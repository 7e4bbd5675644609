#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>

#include "oracles.hpp"
#include "treemc/errors.hpp"
#include "treemc/free_trees.hpp"
#include "treemc/generators.hpp"
#include "treemc/moments.hpp"
#include "treemc/optimizer.hpp"

using namespace treemc;

namespace {

Rational exact_h(const ArenaTree& t, const Rational& x) {
  Rational s = 0, p = 1;
  for (auto c : oracle::brute_hosoya_coefficients(t)) {
    s += p * Rational(static_cast<long long>(c));
    p *= x;
  }
  return s;
}

std::size_t line_index(const FreeTreeCatalog& c) {
  for (std::size_t i = 0; i < c.trees.size(); ++i)
    if (is_path(c.trees[i])) return i;
  return c.trees.size();
}

const std::vector<std::string> kGrid{"0.1", "0.3", "0.5", "0.7", "0.9", "-0.1", "-0.3", "-0.5", "-0.7", "-0.9"};

/// Tree meeting the case 3b conditions for alpha: vertex 0 carries ell + 1
/// leaves and the edge to v; v's first neighbour v1 sits above stars heavy
/// enough that C_{T_{v1}} >= 1 / |alpha|, and v's remaining neighbours are
/// star centres with C <= 0.
ArenaTree case3b_instance(std::mt19937_64& gen, const Rational& alpha) {
  const double a = -boost::multiprecision::abs(alpha).convert_to<double>();
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(gen); };
  std::vector<std::pair<VertexId, VertexId>> edges;
  VertexId next = 1;
  const std::size_t ell = pick(1, 3);
  for (std::size_t i = 0; i <= ell; ++i) edges.emplace_back(0, next++);
  const VertexId v = next++;
  edges.emplace_back(0, v);
  const VertexId v1 = next++;
  edges.emplace_back(v, v1);
  // each star below v1 with m leaves adds m a^2 - |a| to C_{v1}, which
  // then exceeds 1 / |a| + 2 and outweighs the negative neighbours below
  const std::size_t stars = pick(1, 2);
  const std::size_t heavy = static_cast<std::size_t>(std::ceil((1.0 / -a + 2.0) / (a * a))) + pick(0, 2);
  for (std::size_t s = 0; s < stars; ++s) {
    const VertexId c = next++;
    edges.emplace_back(v1, c);
    for (std::size_t m = 0; m < heavy; ++m) edges.emplace_back(c, next++);
  }
  const std::size_t others = pick(0, 1);
  const std::size_t neg = static_cast<std::size_t>(std::ceil(1.0 / -a)) + pick(0, 1);
  for (std::size_t s = 0; s < others; ++s) {
    const VertexId c = next++;
    edges.emplace_back(v, c);
    for (std::size_t m = 0; m < neg; ++m) edges.emplace_back(c, next++);
  }
  // shuffle ids other than 0 so that children order varies
  std::vector<VertexId> perm(next);
  for (VertexId i = 0; i < next; ++i) perm[i] = i;
  std::shuffle(perm.begin() + 1 + static_cast<long>(ell) + 1, perm.end(), gen);
  for (auto& [x, y] : edges) {
    x = perm[x];
    y = perm[y];
  }
  return ArenaTree::from_edges(next, edges);
}

}  // namespace

TEST_CASE("catalog sizes") {
  CHECK(enumerate_free_trees(1).trees.size() == 1);
  CHECK(enumerate_free_trees(4).trees.size() == 2);
  CHECK(enumerate_free_trees(7).trees.size() == 11);
  const std::vector<std::size_t> known{1, 1, 1, 2, 3, 6, 11, 23, 47, 106, 235, 551, 1301, 3159, 7741, 19320};
  for (std::size_t n = 1; n <= 16; ++n) {
    CHECK(oracle::otter_free_tree_count(n) == known[n - 1]);
    if (n <= 14) CHECK(enumerate_free_trees(n).trees.size() == known[n - 1]);
  }
  CHECK_THROWS_AS(enumerate_free_trees(17), ResourceError);
  CHECK_THROWS_AS(enumerate_free_trees(12, 10), ResourceError);
  CHECK_THROWS_AS(enumerate_free_trees(0), std::invalid_argument);
}

TEST_CASE("full catalog at the cap") {
  FreeTreeCatalog c = enumerate_free_trees(16);
  CHECK(c.trees.size() == 19320);
  CHECK(std::is_sorted(c.codes.begin(), c.codes.end()));
}

TEST_CASE("catalog classes match the Prufer oracle") {
  for (std::size_t n = 1; n <= 8; ++n) {
    FreeTreeCatalog c = enumerate_free_trees(n);
    std::set<std::string> mine;
    for (const auto& t : c.trees) {
      CHECK(t.size() == n);
      mine.insert(oracle::all_rootings_key(oracle::adjacency(t)));
    }
    CHECK(mine.size() == c.trees.size());
    CHECK(mine == oracle::prufer_free_tree_keys(n));
  }
}

TEST_CASE("canonical codes") {
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 200; ++rep) {
    ArenaTree t = oracle::random_tree(2 + rep % 20, gen);
    ArenaTree r = reroot(t, gen() % t.size());
    CHECK(canonical_code(t) == canonical_code(r));
    ArenaTree back = tree_from_code(canonical_code(t));
    CHECK(canonical_code(back) == canonical_code(t));
    CHECK(oracle::all_rootings_key(oracle::adjacency(back)) == oracle::all_rootings_key(oracle::adjacency(t)));
    auto centres = tree_centers(t);
    CHECK((centres.size() == 1 || centres.size() == 2));
  }
  CHECK(tree_centers(deterministic_family(Line{6})) == std::vector<VertexId>{2, 3});
  CHECK(rooted_code(deterministic_family(Star{3}), 0) == "(()())");
  CHECK(canonical_code(deterministic_family(Line{2})) == canonical_code(reroot(deterministic_family(Line{2}), 1)));
}

TEST_CASE("minimizer examples") {
  FreeTreeCatalog c6 = enumerate_free_trees(6);
  auto half = hosoya_minimizers(c6, Rational(1, 2));
  REQUIRE(half.indices.size() == 1);
  CHECK(is_path(c6.trees[half.indices[0]]));
  auto neg = hosoya_minimizers(c6, Rational(-1));
  CHECK(neg.value == 0);
  bool has_line = false, has_cherry = false;
  const std::string cherry = canonical_code(deterministic_family(DoubleCherry{}));
  for (auto i : neg.indices) {
    has_line = has_line || is_path(c6.trees[i]);
    has_cherry = has_cherry || c6.codes[i] == cherry;
  }
  CHECK(has_line);
  CHECK(has_cherry);
  auto zero = hosoya_minimizers(c6, Rational(0));
  CHECK(zero.value == 6);
  CHECK(zero.indices.size() == 6);
  auto dbl = hosoya_minimizers(c6, 0.5);
  CHECK(dbl.indices == half.indices);
}

TEST_CASE("minimizers over every catalog up to 12 vertices") {
  for (std::size_t n = 1; n <= 12; ++n) {
    FreeTreeCatalog c = enumerate_free_trees(n);
    const std::size_t line = line_index(c);
    REQUIRE(line < c.trees.size());
    for (const auto& a : kGrid) {
      auto m = hosoya_minimizers(c, rational_from_decimal(a));
      if (n <= 3) {
        CHECK(m.indices.size() == c.trees.size());
        continue;
      }
      REQUIRE(m.indices.size() == 1);
      CHECK(m.indices[0] == line);
      CHECK(m.value == exact_h(c.trees[line], rational_from_decimal(a)));
    }
    auto m1 = hosoya_minimizers(c, Rational(-1));
    std::vector<std::size_t> balanced;
    for (std::size_t i = 0; i < c.trees.size(); ++i)
      if (bipartite_imbalance(c.trees[i]) == n % 2) balanced.push_back(i);
    CHECK(m1.indices == balanced);
    CHECK(m1.value == Rational(static_cast<long long>(n % 2)));
    if (n >= 5) CHECK(m1.indices.size() > 1);
    for (int a : {0, 1}) CHECK(hosoya_minimizers(c, Rational(a)).indices.size() == c.trees.size());
  }
}

TEST_CASE("bipartite imbalance") {
  CHECK(bipartite_imbalance(deterministic_family(Line{6})) == 0);
  CHECK(bipartite_imbalance(deterministic_family(Star{4})) == 4);
  CHECK(bipartite_imbalance(deterministic_family(Line{7})) == 1);
  for (std::size_t n = 1; n <= 9; ++n)
    for (const auto& t : enumerate_free_trees(n).trees)
      CHECK(Rational(static_cast<long long>(bipartite_imbalance(t))) == exact_h(t, Rational(-1)));
}

TEST_CASE("rooted line profile") {
  const double a = -0.4;
  CHECK(rooted_line_profile(3, 1, a) == doctest::Approx(1 + a + a * a));
  CHECK(rooted_line_profile(3, 2, a) == doctest::Approx(1 + 2 * a));
  CHECK(rooted_line_profile(1, 1, a) == doctest::Approx(1.0));
  CHECK_THROWS_AS(rooted_line_profile(3, 0, a), std::invalid_argument);
  CHECK_THROWS_AS(rooted_line_profile(3, 4, a), std::invalid_argument);
  CHECK_THROWS_AS(rooted_line_profile(3, 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(rooted_line_profile(3, 1, Rational(1)), std::invalid_argument);
  for (const auto& s : kGrid) {
    const Rational x = rational_from_decimal(s);
    for (std::size_t k = 1; k <= 12; ++k) {
      ArenaTree line = deterministic_family(Line{k});
      Rational best = -1000;
      for (std::size_t j = 1; j <= k; ++j) {
        const Rational c = rooted_line_profile(k, j, x);
        CHECK(c == rooted_profile(line, j - 1, x));
        best = std::max(best, c);
      }
      if (x < 0)
        for (std::size_t j = 2; j < k; ++j) CHECK(rooted_line_profile(k, j, x) < best);
      if (x < 0) CHECK(rooted_line_profile(k, 1, x) == best);
    }
  }
}

TEST_CASE("edge-split identity on every edge of every small tree") {
  for (std::size_t n = 2; n <= 10; ++n)
    for (const auto& t : enumerate_free_trees(n).trees)
      for (VertexId v = 1; v < t.size(); ++v) {
        const VertexId u = *t.parent(v);
        auto [tu, tv] = split_at_edge(t, u, v);
        CHECK(tu.size() + tv.size() == n);
        for (const Rational x : {Rational(-7, 10), Rational(1, 3), Rational(-1)}) {
          const Rational lhs = exact_h(t, x);
          const Rational rhs = exact_h(tu, x) + exact_h(tv, x) + 2 * x * rooted_profile(tu, 0, x) * rooted_profile(tv, 0, x);
          CHECK(lhs == rhs);
        }
      }
}

TEST_CASE("proof move examples") {
  ArenaTree sp = spider({1, 1, 3});
  auto out = proof_move(sp, MoveCase::Case1, Rational(1, 2));
  REQUIRE(std::holds_alternative<MoveResult>(out));
  const auto& r = std::get<MoveResult>(out);
  CHECK(r.delta > 0);
  CHECK(is_path(r.rewritten));
  CHECK(r.delta == exact_h(sp, Rational(1, 2)) - exact_h(r.rewritten, Rational(1, 2)));

  ArenaTree star = deterministic_family(Star{5});
  auto s2 = proof_move(star, MoveCase::Case2, Rational(-1, 2));
  REQUIRE(std::holds_alternative<MoveResult>(s2));
  CHECK(std::get<MoveResult>(s2).delta > 0);
  CHECK(is_path(std::get<MoveResult>(s2).rewritten));

  ArenaTree line = deterministic_family(Line{6});
  for (MoveCase c : {MoveCase::Case1, MoveCase::Case2, MoveCase::Case3a, MoveCase::Case3b})
    CHECK(std::holds_alternative<MoveRefusal>(proof_move(line, c, Rational(-1, 2))));
  auto wrong_sign = proof_move(star, MoveCase::Case1, Rational(-1, 2));
  REQUIRE(std::holds_alternative<MoveRefusal>(wrong_sign));
  CHECK(std::get<MoveRefusal>(wrong_sign).condition.find("alpha") != std::string::npos);
  // C_{T_v} = 1 > 0 for the star, so case 3 conditions fail
  auto s3 = proof_move(star, MoveCase::Case3a, Rational(-1, 2));
  REQUIRE(std::holds_alternative<MoveRefusal>(s3));
  CHECK(std::get<MoveRefusal>(s3).condition.find("C_{T_v}") != std::string::npos);
  // spider (1, 2): u has a single leaf
  CHECK(std::holds_alternative<MoveRefusal>(proof_move(spider({1, 1, 2}), MoveCase::Case2, Rational(-1, 2))) == false);
  CHECK(std::holds_alternative<MoveRefusal>(proof_move(spider({2, 2, 2}), MoveCase::Case2, Rational(-1, 2))));

  CHECK(move_case_from_string("case3b") == MoveCase::Case3b);
  CHECK(to_string(MoveCase::Case3a) == "case3a");
  CHECK_THROWS_AS(move_case_from_string("case4"), std::invalid_argument);
}

TEST_CASE("targeted instance satisfies case 3b") {
  std::mt19937_64 gen(1);
  for (int rep = 0; rep < 200; ++rep) {
    const Rational alpha(-static_cast<long long>(100 + gen() % 800), 1000);
    auto out = proof_move(case3b_instance(gen, alpha), MoveCase::Case3b, alpha);
    if (auto* ref = std::get_if<MoveRefusal>(&out)) FAIL(ref->condition);
  }
}

TEST_CASE("every admissible move strictly lowers H") {
  std::mt19937_64 gen(2718);
  const std::size_t want = 10000;
  for (MoveCase c : {MoveCase::Case1, MoveCase::Case2, MoveCase::Case3a, MoveCase::Case3b}) {
    std::size_t ok = 0, attempts = 0;
    while (ok < want && attempts < 200 * want) {
      ++attempts;
      // case 3b instances grow like |alpha|^-3, so keep |alpha| >= 0.1 there
      const long long p = c == MoveCase::Case3b ? 100 + static_cast<long long>(gen() % 900)
                                                : 1 + static_cast<long long>(gen() % 999);
      const Rational alpha(c == MoveCase::Case1 ? p : -p, 1000);
      ArenaTree t;
      if (c == MoveCase::Case1) {
        Rng rng(gen());
        t = random_labelled_tree(4 + gen() % 9, rng);
      } else if (c == MoveCase::Case3b) {
        t = case3b_instance(gen, alpha);
      } else {
        Rng rng(gen());
        t = random_move_instance(4 + gen() % 9, rng);
      }
      auto out = proof_move(t, c, alpha);
      const auto* r = std::get_if<MoveResult>(&out);
      if (!r) continue;
      ++ok;
      CHECK(r->rewritten.size() == t.size());
      REQUIRE(r->delta > 0);
      CHECK(r->delta >= r->bound);
      if (c == MoveCase::Case3a) CHECK(r->delta == r->bound);
      if (ok % 50 == 0) CHECK(r->delta == exact_h(t, alpha) - exact_h(r->rewritten, alpha));
    }
    INFO(to_string(c));
    CHECK(ok == want);
  }
}

TEST_CASE("stationary variance is minimised by the line") {
  // reversible 3-state chain built from a symmetric weight matrix
  Eigen::MatrixXd w(3, 3);
  w << 0.3, 0.5, 0.2, 0.5, 0.1, 0.4, 0.2, 0.4, 0.4;
  Eigen::VectorXd rows = w.rowwise().sum();
  FiniteKernel q(Eigen::MatrixXd(rows.asDiagonal().inverse() * w));
  Measure mu(rows / rows.sum());
  Eigen::VectorXd f(3);
  f << 1.0, -0.5, 2.0;
  SpectralDecomposition d = spectral_decompose(q, mu, f);
  // f has mass outside the constants and no mass on Ker(Q) or Ker(Q + I)
  std::size_t inner = 0;
  for (const auto& comp : d.significant_components()) {
    if (comp.eigenvalue > 1.0 - 1e-9) continue;
    CHECK(std::abs(comp.eigenvalue) < 1.0 - 1e-9);
    CHECK(std::abs(comp.eigenvalue) > 1e-9);
    ++inner;
  }
  CHECK(inner > 0);
  for (std::size_t n = 4; n <= 10; ++n) {
    FreeTreeCatalog c = enumerate_free_trees(n);
    const std::size_t line = line_index(c);
    std::vector<double> var;
    for (const auto& t : c.trees) {
      auto all = truncation(t, t.max_height());
      var.push_back(stationary_variance(t, all, q, mu, f));
    }
    for (std::size_t i = 0; i < var.size(); ++i)
      if (i != line) CHECK(var[i] - var[line] > 1e-12);
  }
}
