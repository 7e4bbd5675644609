#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "treemc/errors.hpp"
#include "treemc/generators.hpp"
#include "treemc/moments.hpp"
#include "treemc/profile.hpp"
#include "treemc/sampler.hpp"

using namespace treemc;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

/// |observed - expected| < 3 sigma for a binomial proportion.
bool within_3_sigma(std::size_t hits, std::size_t reps, double p) {
  const double sigma = std::sqrt(std::max(p * (1 - p), 1e-300) / static_cast<double>(reps));
  return std::abs(static_cast<double>(hits) / static_cast<double>(reps) - p) < 3 * sigma;
}

}  // namespace

TEST_CASE("root draws follow the initial law") {
  ArenaTree t;
  FiniteKernel q = FiniteKernel::from_rows({{0.5, 0.5, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}});
  Measure nu(vec({0.2, 0.5, 0.3}));
  ProcessSampler sampler(q, nu);
  std::vector<std::size_t> hits(3, 0);
  const std::size_t reps = 100000;
  for (std::size_t r = 0; r < reps; ++r) ++hits[sampler.sample(t, derive_seed(3, r)).value(0)];
  for (std::size_t x = 0; x < 3; ++x) CHECK(within_3_sigma(hits[x], reps, nu[x]));
}

TEST_CASE("a line samples an ordinary Markov chain") {
  ArenaTree t = deterministic_family(Line{3});
  FiniteKernel q = FiniteKernel::from_rows({{0.7, 0.3}, {0.4, 0.6}});
  Measure nu(vec({0.35, 0.65}));
  std::map<std::vector<std::size_t>, std::size_t> freq;
  const std::size_t reps = 100000;
  for (std::size_t r = 0; r < reps; ++r) ++freq[sample_process(t, q, nu, derive_seed(9, r)).values()];
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t c = 0; c < 2; ++c) {
        const double p = nu[a] * q(a, b) * q(b, c);
        CHECK(within_3_sigma(freq[{a, b, c}], reps, p));
      }
}

TEST_CASE("a permutation kernel is deterministic given the root") {
  FiniteKernel rot = FiniteKernel::from_rows({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}});
  ArenaTree t = deterministic_family(CompleteDary{3, 4});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ProcessSample s = sample_process(t, rot, Measure::uniform(3), seed);
    for (VertexId v = 0; v < t.size(); ++v) CHECK(s.value(v) == (s.value(0) + t.height(v)) % 3);
  }
}

TEST_CASE("sampling is deterministic and independent of index order") {
  std::mt19937_64 gen(4);
  ArenaTree t = oracle::random_tree(300, gen);
  FiniteKernel q(oracle::random_reversible(4, gen));
  Measure nu = Measure::dirac(4, 1);
  ProcessSample a = sample_process(t, q, nu, 123);
  ProcessSample b = sample_process(t, q, nu, 123);
  CHECK(a.values() == b.values());
  CHECK(a.values() != sample_process(t, q, nu, 124).values());
  std::vector<std::size_t> buf;
  ProcessSampler(q, nu).sample_into(t, 123, buf);
  CHECK(buf == a.values());
}

TEST_CASE("marginals match nu Q^h") {
  ArenaTree t = deterministic_family(CompleteDary{2, 6});
  FiniteKernel q = FiniteKernel::from_rows({{0.1, 0.6, 0.3}, {0.5, 0.2, 0.3}, {0.3, 0.3, 0.4}});
  Measure nu = Measure::dirac(3, 0);
  const std::vector<VertexId> spots{0, 1, 5, 20, 126};
  std::vector<std::vector<std::size_t>> hits(spots.size(), std::vector<std::size_t>(3, 0));
  const std::size_t reps = 40000;
  ProcessSampler sampler(q, nu);
  std::vector<std::size_t> buf;
  for (std::size_t r = 0; r < reps; ++r) {
    sampler.sample_into(t, derive_seed(1, r), buf);
    for (std::size_t i = 0; i < spots.size(); ++i) ++hits[i][buf[spots[i]]];
  }
  for (std::size_t i = 0; i < spots.size(); ++i) {
    Eigen::VectorXd law = evolve(nu, q, t.height(spots[i]));
    for (std::size_t x = 0; x < 3; ++x) CHECK(within_3_sigma(hits[i][x], reps, law(static_cast<Eigen::Index>(x))));
  }
}

TEST_CASE("empirical sums and averages") {
  ArenaTree t({std::nullopt, 0});
  ProcessSample s(t, {0, 1});
  Eigen::VectorXd id = vec({1, -1});
  const std::vector<VertexId> both{0, 1}, root{0}, none{};
  CHECK(empirical_average(s, both, id) == 0.0);
  CHECK(empirical_sum(s, root, id) == 1.0);
  CHECK(empirical_average(s, root, id) == 1.0);
  CHECK(empirical_average(s, both, vec({4, 4})) == 4.0);
  CHECK_THROWS_AS(empirical_average(s, none, id), std::invalid_argument);
  const std::vector<VertexId> bad{7};
  CHECK_THROWS_AS(empirical_sum(s, bad, id), std::invalid_argument);
}

TEST_CASE("Monte-Carlo L2 error against exact values") {
  FiniteKernel q = FiniteKernel::from_rows({{0.75, 0.25}, {0.25, 0.75}});
  Measure mu = Measure::uniform(2);
  Eigen::VectorXd f = vec({1, -1});

  ArenaTree two = deterministic_family(Line{2});
  const std::vector<VertexId> pair{0, 1};
  L2Estimate e = l2_error_mc(two, q, mu, f, pair, 20000, 5);
  CHECK(e.c_f == doctest::Approx(0.0).scale(1.0));
  CHECK(std::abs(e.mean_squared_error - 0.75) < 3 * e.standard_error);

  const std::vector<VertexId> all{0, 1};
  L2Estimate flat = l2_error_mc(two, q, mu, vec({2, 2}), all, 100, 5);
  CHECK(flat.mean_squared_error == 0.0);

  ArenaTree bin = deterministic_family(CompleteDary{2, 8});
  auto g8 = generation(bin, 8);
  const double exact = exact_l2_error(ancestral_profile(bin, g8), q, Measure::dirac(2, 0), f, 0.0);
  L2Estimate mc = l2_error_mc(bin, q, Measure::dirac(2, 0), f, g8, 20000, 11);
  CHECK(std::abs(mc.mean_squared_error - exact) < 3 * mc.standard_error);
  CHECK(mc.replicates == 20000);

  // results do not depend on the worker count
  L2Estimate one = l2_error_mc(bin, q, mu, f, g8, 500, 2, 0.0, 1);
  L2Estimate four = l2_error_mc(bin, q, mu, f, g8, 500, 2, 0.0, 4);
  CHECK(one.mean_squared_error == four.mean_squared_error);
  CHECK(one.standard_error == four.standard_error);

  CHECK_THROWS_AS(l2_error_mc(two, FiniteKernel::identity(2), mu, f, pair, 100, 1), ContractError);
  CHECK_THROWS_AS(l2_error_mc(two, q, mu, f, pair, 1, 1, 0.0), std::invalid_argument);
}

TEST_CASE("jackknife standard error of a mean") {
  std::vector<double> xs{1, 2, 3, 4, 5, 6};
  // for the sample mean the jackknife equals s / sqrt(n)
  const double s = std::sqrt(17.5 / 5);
  CHECK(jackknife_standard_error(xs) == doctest::Approx(s / std::sqrt(6.0)));
}
