#include "treemc/galton_watson.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "treemc/errors.hpp"

namespace treemc {

OffspringDistribution::OffspringDistribution(std::map<std::size_t, double> pmf) : pmf_(std::move(pmf)) {
  if (pmf_.empty()) throw std::invalid_argument("offspring pmf is empty");
  double total = 0.0;
  for (auto [k, p] : pmf_) {
    if (!(p >= 0.0) || p > 1.0) throw std::invalid_argument("offspring probability out of [0,1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("offspring pmf does not sum to 1");
  double acc = 0.0;
  for (auto [k, p] : pmf_) {
    if (p == 0.0) continue;
    acc += p;
    support_.push_back(k);
    cdf_.push_back(acc);
    mean_ += static_cast<double>(k) * p;
    second_moment_ += static_cast<double>(k) * static_cast<double>(k) * p;
  }
  cdf_.back() = 1.0;
}

double OffspringDistribution::pgf(double s) const {
  double result = 0.0;
  for (auto it = pmf_.rbegin(); it != pmf_.rend(); ++it) {
    // Horner over the sparse support.
    auto next = std::next(it);
    std::size_t gap = next == pmf_.rend() ? it->first : it->first - next->first;
    result = (result + it->second) * std::pow(s, static_cast<double>(gap));
  }
  return result;
}

std::size_t OffspringDistribution::sample(Rng& rng) const {
  double u = rng.uniform();
  for (std::size_t i = 0; i < cdf_.size(); ++i)
    if (u < cdf_[i]) return support_[i];
  return support_.back();
}

double extinction_probability(const OffspringDistribution& off) {
  double s = 0.0;
  for (int iter = 0; iter < 100'000'000; ++iter) {
    double next = off.pgf(s);
    if (std::abs(next - s) < 1e-14) return next;
    s = next;
  }
  return s;
}

double survival_probability(const OffspringDistribution& off, std::size_t horizon) {
  double s = 0.0;
  for (std::size_t i = 0; i < horizon; ++i) s = off.pgf(s);
  return 1.0 - s;
}

ArenaTree gw_tree(const OffspringDistribution& off, std::size_t horizon, Rng& rng, std::size_t vertex_cap) {
  std::vector<std::optional<VertexId>> parents{std::nullopt};
  std::size_t begin = 0, end = 1;
  for (std::size_t h = 0; h < horizon && begin < end; ++h) {
    for (std::size_t w = begin; w < end; ++w) {
      std::size_t kids = off.sample(rng);
      if (parents.size() + kids > vertex_cap)
        throw ResourceError("Galton-Watson tree exceeds vertex cap " + std::to_string(vertex_cap));
      for (std::size_t i = 0; i < kids; ++i) parents.emplace_back(w);
    }
    begin = end;
    end = parents.size();
  }
  return ArenaTree(parents);
}

std::vector<bool> survivor_marks(const ArenaTree& t, std::size_t horizon) {
  std::vector<bool> mark(t.size(), false);
  const auto& order = t.bfs_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    VertexId v = *it;
    if (t.height(v) == horizon) {
      mark[v] = true;
    } else {
      for (VertexId c : t.children(v))
        if (mark[c]) {
          mark[v] = true;
          break;
        }
    }
  }
  return mark;
}

GwSample gw_conditioned(const OffspringDistribution& off, std::size_t horizon, std::uint64_t seed,
                        std::size_t retry_cap, std::size_t vertex_cap) {
  if (!(off.mean() > 1.0))
    throw std::invalid_argument("gw_conditioned: offspring mean must exceed 1 (got " + std::to_string(off.mean()) + ")");
  Rng rng(seed);
  for (std::size_t retries = 0; retries <= retry_cap; ++retries) {
    ArenaTree t = gw_tree(off, horizon, rng, vertex_cap);
    if (t.max_height() < horizon) continue;
    GwSample out{std::move(t), horizon, {}, retries};
    out.survivor = survivor_marks(out.tree, horizon);
    return out;
  }
  throw SamplingError("gw_conditioned: no survivor to horizon " + std::to_string(horizon) + " after " +
                      std::to_string(retry_cap) + " retries");
}

}  // namespace treemc
