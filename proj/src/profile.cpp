#include "treemc/profile.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>
#include <unordered_map>

#include "treemc/errors.hpp"

namespace treemc {
namespace {

constexpr unsigned kKeyBits = 21;
constexpr std::uint64_t kKeyMask = (std::uint64_t{1} << kKeyBits) - 1;

std::uint64_t pack(std::size_t k, std::size_t a, std::size_t b) {
  return (static_cast<std::uint64_t>(k) << (2 * kKeyBits)) | (static_cast<std::uint64_t>(a) << kKeyBits) |
         static_cast<std::uint64_t>(b);
}

ProfileKey unpack(std::uint64_t key) {
  return ProfileKey{static_cast<std::size_t>(key >> (2 * kKeyBits)),
                    static_cast<std::size_t>((key >> kKeyBits) & kKeyMask), static_cast<std::size_t>(key & kKeyMask)};
}

}  // namespace

std::uint64_t AncestralProfile::count(const ProfileKey& key) const {
  auto it = counts_.find(key);
  return it == counts_.end() ? 0 : it->second;
}

std::uint64_t AncestralProfile::total() const {
  std::uint64_t s = 0;
  for (const auto& [k, c] : counts_) s += c;
  return s;
}

std::size_t AncestralProfile::max_ancestor_height() const {
  std::size_t m = 0;
  for (const auto& [k, c] : counts_) m = std::max(m, k.ancestor_height);
  return m;
}

std::size_t AncestralProfile::max_branch() const {
  std::size_t m = 0;
  for (const auto& [k, c] : counts_) m = std::max({m, k.branch_u, k.branch_v});
  return m;
}

AncestralProfile ancestral_profile(const ArenaTree& t, std::span<const VertexId> subset) {
  if (subset.empty()) throw std::invalid_argument("ancestral_profile: empty subset");
  if (t.max_height() > kKeyMask) throw ResourceError("ancestral_profile: tree too deep");
  std::vector<bool> member(t.size(), false);
  for (VertexId v : subset) {
    t.check_vertex(v);
    if (member[v]) throw std::invalid_argument("ancestral_profile: vertex " + std::to_string(v) + " repeated");
    member[v] = true;
  }

  std::unordered_map<std::uint64_t, std::uint64_t> acc_counts;
  // hist[w].back() counts members at w's own depth; hist[w][len-1-j] counts
  // members j levels below w.
  std::vector<std::vector<std::uint64_t>> hist(t.size());
  const auto& order = t.bfs_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const VertexId w = *it;
    const std::size_t h = t.height(w);
    const auto kids = t.children(w);

    std::vector<std::uint64_t> acc;
    if (!kids.empty()) {
      VertexId big = *std::max_element(kids.begin(), kids.end(), [&](VertexId a, VertexId b) {
        return hist[a].size() < hist[b].size();
      });
      acc = std::move(hist[big]);
      hist[big] = {};
      acc.push_back(0);
      for (VertexId c : kids) {
        if (c == big) continue;
        auto& hc = hist[c];
        const std::size_t la = acc.size(), lc = hc.size();
        for (std::size_t ia = 0; ia < la; ++ia) {
          if (acc[ia] == 0) continue;
          const std::size_t a = la - 1 - ia;
          for (std::size_t ic = 0; ic < lc; ++ic) {
            if (hc[ic] == 0) continue;
            const std::size_t b = lc - ic;  // one edge from w down to c
            const std::uint64_t pairs = acc[ia] * hc[ic];
            acc_counts[pack(h, a, b)] += pairs;
            acc_counts[pack(h, b, a)] += pairs;
          }
        }
        for (std::size_t ic = 0; ic < lc; ++ic) acc[la - 1 - (lc - ic)] += hc[ic];
        hc = {};
      }
    } else {
      acc.push_back(0);
    }

    if (member[w]) {
      const std::size_t la = acc.size();
      for (std::size_t ia = 0; ia + 1 < la; ++ia) {
        if (acc[ia] == 0) continue;
        const std::size_t a = la - 1 - ia;
        acc_counts[pack(h, 0, a)] += acc[ia];
        acc_counts[pack(h, a, 0)] += acc[ia];
      }
      acc_counts[pack(h, 0, 0)] += 1;
      acc.back() = 1;
    }
    hist[w] = std::move(acc);
  }

  std::map<ProfileKey, std::uint64_t> counts;
  for (auto [key, c] : acc_counts) counts.emplace(unpack(key), c);
  return AncestralProfile(subset.size(), std::move(counts));
}

HosoyaPolynomial::HosoyaPolynomial(std::vector<std::uint64_t> coefficients) : coeffs_(std::move(coefficients)) {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

double HosoyaPolynomial::operator()(double x) const {
  long double r = 0.0L;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) r = r * x + static_cast<long double>(*it);
  return static_cast<double>(r);
}

Rational HosoyaPolynomial::operator()(const Rational& x) const {
  Rational r = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) r = r * x + Rational(BigInt(*it));
  return r;
}

HosoyaPolynomial hosoya_polynomial(const AncestralProfile& profile) {
  std::vector<std::uint64_t> c;
  for (const auto& [key, count] : profile.counts()) {
    std::size_t d = key.branch_u + key.branch_v;
    if (c.size() <= d) c.resize(d + 1, 0);
    c[d] += count;
  }
  return HosoyaPolynomial(std::move(c));
}

HosoyaPolynomial hosoya_polynomial(const ArenaTree& t, std::span<const VertexId> subset) {
  return hosoya_polynomial(ancestral_profile(t, subset));
}

HosoyaPolynomial hosoya_polynomial(const ArenaTree& t) {
  std::vector<VertexId> all(t.size());
  for (VertexId v = 0; v < t.size(); ++v) all[v] = v;
  return hosoya_polynomial(t, all);
}

double hosoya_wiener(const ArenaTree& t, std::span<const VertexId> subset, double alpha) {
  return hosoya_polynomial(t, subset)(alpha);
}

double evaluate_polynomial(const std::vector<std::int64_t>& coefficients, double x) {
  long double r = 0.0L;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it)
    r = r * x + static_cast<long double>(*it);
  return static_cast<double>(r);
}

Rational rational_from_decimal(const std::string& text) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  bool negative = false;
  if (i < n && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
  BigInt digits = 0;
  long long exponent = 0;
  bool any = false;
  while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) {
    digits = digits * 10 + (text[i++] - '0');
    any = true;
  }
  if (i < n && text[i] == '.') {
    ++i;
    while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) {
      digits = digits * 10 + (text[i++] - '0');
      --exponent;
      any = true;
    }
  }
  if (!any) throw std::invalid_argument("not a decimal number: '" + text + "'");
  if (i < n && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool exp_negative = false;
    if (i < n && (text[i] == '+' || text[i] == '-')) exp_negative = text[i++] == '-';
    long long e = 0;
    bool exp_any = false;
    while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) {
      e = e * 10 + (text[i++] - '0');
      exp_any = true;
      if (e > 4000) throw std::invalid_argument("decimal exponent too large: '" + text + "'");
    }
    if (!exp_any) throw std::invalid_argument("not a decimal number: '" + text + "'");
    exponent += exp_negative ? -e : e;
  }
  if (i != n) throw std::invalid_argument("not a decimal number: '" + text + "'");
  BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(exponent < 0 ? -exponent : exponent));
  Rational r = exponent < 0 ? Rational(digits, scale) : Rational(digits * scale);
  return negative ? Rational(-r) : r;
}

Rational rational_from_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return rational_from_decimal(std::string(buf, res.ptr));
}

}  // namespace treemc
