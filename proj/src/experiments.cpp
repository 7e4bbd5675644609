#include "treemc/experiments.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "treemc/assumptions.hpp"
#include "treemc/errors.hpp"
#include "treemc/galton_watson.hpp"
#include "treemc/generators.hpp"
#include "treemc/kernel.hpp"
#include "treemc/moments.hpp"
#include "treemc/optimizer.hpp"
#include "treemc/parallel.hpp"
#include "treemc/profile.hpp"
#include "treemc/rng.hpp"
#include "treemc/sampler.hpp"

namespace treemc {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- schema

enum class Type { Unsigned, Integer, Number, String, Boolean, NumberArray, UnsignedArray, StringArray, NumberMatrix,
                  NumberMap, Object };

struct Field {
  std::string key;
  Type type;
  bool required = false;
  json fallback;  // null: no default, key stays absent
  std::string doc;
  std::vector<std::string> choices;
  std::vector<Field> nested;
};

const char* type_name(Type t) {
  switch (t) {
    case Type::Unsigned: return "nonnegative integer";
    case Type::Integer: return "integer";
    case Type::Number: return "number";
    case Type::String: return "string";
    case Type::Boolean: return "boolean";
    case Type::NumberArray: return "array of numbers";
    case Type::UnsignedArray: return "array of nonnegative integers";
    case Type::StringArray: return "array of strings";
    case Type::NumberMatrix: return "array of number arrays";
    case Type::NumberMap: return "object {\"k\": number}";
    case Type::Object: return "object";
  }
  return "value";
}

struct KindInfo {
  std::string summary;
  std::string verifies;
  std::vector<Field> fields;
};

Field kernel_field() {
  return {"kernel", Type::Object, true, nullptr, "finite transition kernel", {},
          {{"matrix", Type::NumberMatrix, true, nullptr, "row-stochastic matrix, one row per state", {}, {}}}};
}

Field function_field() {
  return {"function", Type::NumberArray, true, nullptr, "f(x) for each state x", {}, {}};
}

Field tree_field(bool required) {
  return {"tree", Type::Object, required, nullptr, "tree shape", {},
          {{"family", Type::String, true, nullptr, "tree family",
            {"complete_dary", "bethe", "line", "star", "double_cherry", "spherically_symmetric", "spider",
             "galton_watson"},
            {}},
           {"arity", Type::Unsigned, false, 2, "children per vertex (complete_dary, bethe)", {}, {}},
           {"depth", Type::Unsigned, false, nullptr, "depth (default: largest horizon)", {}, {}},
           {"n", Type::Unsigned, false, nullptr, "vertex count (line: default largest horizon + 1; star)", {}, {}},
           {"degrees", Type::UnsignedArray, false, nullptr, "per-height child counts (spherically_symmetric)", {}, {}},
           {"legs", Type::UnsignedArray, false, nullptr, "leg lengths (spider)", {}, {}},
           {"offspring", Type::NumberMap, false, nullptr, "offspring pmf (galton_watson)", {}, {}}}};
}

Field subsets_field() {
  return {"subsets", Type::Object, false, json::object(), "averaging sets A_n", {},
          {{"kind", Type::String, false, "generation", "which vertices form A_n",
            {"generation", "truncation", "last_generations"}, {}},
           {"ell", Type::UnsignedArray, false, json::array({0}),
            "last_generations: window length, one value or one per horizon", {}, {}}}};
}

Field horizons_field() {
  return {"horizons", Type::UnsignedArray, true, nullptr, "strictly increasing horizons n", {}, {}};
}

Field sizes_field() {
  return {"sizes", Type::UnsignedArray, true, nullptr, "tree sizes to enumerate (1..16)", {}, {}};
}

std::vector<Field> common_fields(const std::vector<std::string>& kinds) {
  return {{"experiment", Type::String, true, nullptr, "experiment kind", kinds, {}},
          {"seed", Type::Unsigned, false, 1, "master seed", {}, {}},
          {"threads", Type::Integer, false, 0, "worker threads, 0 = all cores", {}, {}},
          {"output_dir", Type::String, false, "out", "directory for results", {}, {}}};
}

const std::map<std::string, KindInfo>& kinds() {
  static const std::map<std::string, KindInfo> table = [] {
    std::map<std::string, KindInfo> t;
    t["ergodic_convergence"] = {
        "exact L2 error, variance and technical term of the empirical average along a subset sequence",
        "L2 convergence of empirical averages of a tree-indexed Markov chain: with an ergodic kernel, "
        "E[(Mbar_{A_n}(f) - c_f)^2] and the common-ancestor technical term vanish as the subsets grow",
        {kernel_field(),
         {"initial", Type::Object, false, json::object(), "law of the root", {},
          {{"kind", Type::String, false, "invariant", "initial law", {"invariant", "uniform", "dirac", "weights"}, {}},
           {"state", Type::Unsigned, false, 0, "dirac: the state", {}, {}},
           {"weights", Type::NumberArray, false, nullptr, "weights: probability vector", {}, {}}}},
         function_field(), tree_field(true), subsets_field(), horizons_field(),
         {"mc_replicates", Type::Unsigned, false, 0, "Monte-Carlo replicates per horizon (0 = exact only)", {}, {}},
         {"n_max", Type::Unsigned, false, 40, "steps used by the kernel ergodicity report", {}, {}},
         {"thresholds", Type::Object, false, json::object(), "verdict thresholds", {},
          {{"l2_tol", Type::Number, false, 1e-3, "final L2 error must be below this", {}, {}},
           {"technical_tol", Type::Number, false, 1e-3, "final technical term must be below this", {}, {}}}}}};
    t["assumption_suite"] = {
        "distance and common-ancestor statistics of two uniform vertices of A_n",
        "geometrical assumption (P(d(U,V) <= k) -> 0 for every k) and ancestral assumption (height of the "
        "common ancestor of U and V tight in n), on Galton-Watson trees conditioned to survive or on a fixed tree",
        {{"offspring", Type::NumberMap, false, nullptr, "offspring pmf; samples conditioned Galton-Watson trees", {}, {}},
         tree_field(false), subsets_field(), horizons_field(),
         {"replicates", Type::Unsigned, false, 100, "Galton-Watson replicates", {}, {}},
         {"retry_cap", Type::Unsigned, false, static_cast<std::uint64_t>(kDefaultGwRetryCap),
          "rejections allowed per conditioned tree", {}, {}},
         {"last_generation_ell", Type::Unsigned, false, nullptr,
          "record |G_{n-ell} u ... u G_n| / |T_n| at the largest horizon", {}, {}},
         {"thresholds", Type::Object, false, json::object(), "verdict thresholds", {},
          {{"geometric_epsilon", Type::Number, false, 0.05, "P(d <= k) must end below this", {}, {}},
           {"k_max", Type::Unsigned, false, 2, "largest k for the geometrical check", {}, {}},
           {"ancestral_epsilon", Type::Number, false, 0.1, "target for P(h(U^V) > k)", {}, {}},
           {"ancestral_k_cap", Type::Unsigned, false, nullptr, "largest k tried (default from the heights)", {}, {}}}}}};
    t["variance_scan"] = {
        "Hosoya-Wiener polynomial H_T(alpha) of every free tree of the given sizes over an alpha grid",
        "the line graph is the unique minimiser of H_T(alpha) for alpha in (-1,1)\\{0}; at alpha = -1 the "
        "minimisers are the trees with balanced bipartition; at alpha in {0,1} all trees tie",
        {sizes_field(),
         {"alphas", Type::NumberArray, false,
          json::array({-1.0, -0.9, -0.7, -0.5, -0.3, -0.1, 0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}), "alpha grid in [-1, 1]",
          {}, {}},
         {"write_catalog", Type::Boolean, false, true, "also write catalog_n<N>.jsonl", {}, {}}}};
    t["tree_search"] = {
        "stationary variance of the empirical average over every free tree of the given sizes",
        "among trees of size n the line graph uniquely minimises the variance of the empirical average estimator "
        "for a reversible kernel started at its invariant law",
        {sizes_field(), kernel_field(), function_field()}};
    t["proof_moves"] = {
        "local rewrite moves that strictly decrease H_T(alpha) on random non-path trees",
        "every non-path tree admits a rewrite lowering H_T(alpha): case1 for alpha in (0,1), cases 2, 3a, 3b for "
        "alpha in (-1,0), with the stated lower bounds",
        {{"cases", Type::StringArray, false, json::array({"case1", "case2", "case3a", "case3b"}), "moves to exercise",
          {"case1", "case2", "case3a", "case3b"}, {}},
         {"instances", Type::Unsigned, false, 1000, "applied instances wanted per case", {}, {}},
         {"min_size", Type::Unsigned, false, 4, "smallest random tree", {}, {}},
         {"max_size", Type::Unsigned, false, 12, "largest random tree", {}, {}},
         {"alpha", Type::Number, false, nullptr, "fixed alpha (default: random multiple of 1/1000)", {}, {}},
         {"max_attempts_factor", Type::Unsigned, false, 200, "attempts allowed per wanted instance", {}, {}},
         {"generator", Type::String, false, "prufer",
          "random trees: uniform labelled (prufer) or with a leafy vertex 0 (decorated, needs min_size >= 4)",
          {"prufer", "decorated"}, {}}}};
    std::vector<std::string> names;
    for (auto& [name, info] : t) names.push_back(name);
    for (auto& [name, info] : t) {
      auto common = common_fields(names);
      info.fields.insert(info.fields.begin(), common.begin(), common.end());
    }
    return t;
  }();
  return table;
}

// ---------------------------------------------------------------- validation

std::size_t line_of(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  for (const auto& key : path) {
    std::size_t p = text.find("\"" + key + "\"", pos);
    if (p == std::string::npos) break;
    pos = p;
  }
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

std::string dotted(const std::vector<std::string>& path) {
  std::string s;
  for (const auto& p : path) s += (s.empty() ? "" : ".") + p;
  return s;
}

[[noreturn]] void fail_at(const std::string& text, const std::vector<std::string>& path, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line_of(text, path)) + ": " + msg);
}

bool is_unsigned(const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0); }

bool type_ok(const json& v, Type t) {
  auto all = [&](auto pred) {
    return v.is_array() && std::all_of(v.begin(), v.end(), pred);
  };
  switch (t) {
    case Type::Unsigned: return is_unsigned(v);
    case Type::Integer: return v.is_number_integer();
    case Type::Number: return v.is_number();
    case Type::String: return v.is_string();
    case Type::Boolean: return v.is_boolean();
    case Type::NumberArray: return all([](const json& x) { return x.is_number(); });
    case Type::UnsignedArray: return all([](const json& x) { return is_unsigned(x); });
    case Type::StringArray: return all([](const json& x) { return x.is_string(); });
    case Type::NumberMatrix:
      return all([](const json& row) {
        return row.is_array() && std::all_of(row.begin(), row.end(), [](const json& x) { return x.is_number(); });
      });
    case Type::NumberMap:
      if (!v.is_object()) return false;
      for (auto it = v.begin(); it != v.end(); ++it) {
        const std::string& k = it.key();
        if (k.empty() || !std::all_of(k.begin(), k.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
            !it.value().is_number())
          return false;
      }
      return true;
    case Type::Object: return v.is_object();
  }
  return false;
}

void validate(json& obj, const std::vector<Field>& fields, const std::vector<std::string>& path,
              const std::string& text) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    auto at = path;
    at.push_back(it.key());
    auto f = std::find_if(fields.begin(), fields.end(), [&](const Field& x) { return x.key == it.key(); });
    if (f == fields.end()) {
      std::string allowed;
      for (const auto& x : fields) allowed += (allowed.empty() ? "" : ", ") + x.key;
      fail_at(text, at, "unknown key '" + dotted(at) + "' (allowed: " + allowed + ")");
    }
    if (!type_ok(it.value(), f->type)) fail_at(text, at, "'" + dotted(at) + "' must be " + type_name(f->type));
    if (!f->choices.empty()) {
      std::vector<std::string> given;
      if (it.value().is_array())
        given = it.value().get<std::vector<std::string>>();
      else
        given.push_back(it.value().get<std::string>());
      for (const auto& g : given)
        if (std::find(f->choices.begin(), f->choices.end(), g) == f->choices.end()) {
          std::string allowed;
          for (const auto& c : f->choices) allowed += (allowed.empty() ? "" : ", ") + c;
          fail_at(text, at, "'" + dotted(at) + "' must be one of: " + allowed + " (got '" + g + "')");
        }
    }
    if (f->type == Type::Object) validate(it.value(), f->nested, at, text);
  }
  for (const auto& f : fields) {
    if (obj.contains(f.key)) continue;
    if (f.required) fail_at(text, path, "missing required key '" + dotted(path) + (path.empty() ? "" : ".") + f.key + "'");
    if (!f.fallback.is_null()) {
      obj[f.key] = f.fallback;
      if (f.type == Type::Object) validate(obj[f.key], f.nested, path, text);
    }
  }
}

// ---------------------------------------------------------------- helpers

struct Ctx {
  const json& b;
  const std::string& text;
  std::uint64_t seed;
  int threads;
};

// Runs a builder, turning argument errors into config errors located at `path`.
template <typename F>
auto config_guard(const Ctx& c, const std::vector<std::string>& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    fail_at(c.text, path, "'" + dotted(path) + "': " + e.what());
  } catch (const ContractError& e) {
    fail_at(c.text, path, "'" + dotted(path) + "': " + e.what());
  }
}

std::vector<std::size_t> horizons_of(const Ctx& c) {
  auto h = c.b.at("horizons").get<std::vector<std::size_t>>();
  if (h.empty()) fail_at(c.text, {"horizons"}, "'horizons' must not be empty");
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i] <= h[i - 1]) fail_at(c.text, {"horizons"}, "'horizons' must be strictly increasing");
  return h;
}

FiniteKernel kernel_of(const Ctx& c) {
  return config_guard(c, {"kernel", "matrix"}, [&] {
    auto rows = c.b.at("kernel").at("matrix").get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw std::invalid_argument("kernel needs at least one state");
    for (const auto& r : rows)
      if (r.size() != rows.size()) throw std::invalid_argument("kernel matrix must be square");
    return FiniteKernel::from_rows(rows);
  });
}

StateFunction function_of(const Ctx& c, std::size_t states) {
  auto v = c.b.at("function").get<std::vector<double>>();
  if (v.size() != states)
    fail_at(c.text, {"function"}, "'function' has " + std::to_string(v.size()) + " entries, kernel has " +
                                      std::to_string(states) + " states");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Measure initial_of(const Ctx& c, const FiniteKernel& q) {
  const json& spec = c.b.at("initial");
  const std::string kind = spec.at("kind");
  return config_guard(c, {"initial"}, [&]() -> Measure {
    if (kind == "uniform") return Measure::uniform(q.states());
    if (kind == "dirac") {
      std::size_t x = spec.at("state");
      if (x >= q.states()) throw std::invalid_argument("dirac state out of range");
      return Measure::dirac(q.states(), x);
    }
    if (kind == "weights") {
      if (!spec.contains("weights")) throw std::invalid_argument("kind 'weights' needs 'weights'");
      auto w = spec.at("weights").get<std::vector<double>>();
      if (w.size() != q.states()) throw std::invalid_argument("weights length must match the kernel");
      return Measure(Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())));
    }
    return invariant_measure(q).measure;
  });
}

OffspringDistribution offspring_of(const Ctx& c, const json& pmf, const std::vector<std::string>& path) {
  return config_guard(c, path, [&] {
    std::map<std::size_t, double> m;
    for (auto it = pmf.begin(); it != pmf.end(); ++it) m[std::stoul(it.key())] = it.value().get<double>();
    return OffspringDistribution(m);
  });
}

ArenaTree tree_of(const Ctx& c, std::size_t max_horizon) {
  const json& spec = c.b.at("tree");
  const std::string family = spec.at("family");
  auto need = [&](const char* key) -> const json& {
    if (!spec.contains(key)) fail_at(c.text, {"tree"}, "tree family '" + family + "' needs '" + key + "'");
    return spec.at(key);
  };
  const std::size_t depth = spec.contains("depth") ? spec.at("depth").get<std::size_t>() : max_horizon;
  return config_guard(c, {"tree"}, [&]() -> ArenaTree {
    if (family == "complete_dary") return deterministic_family(CompleteDary{spec.at("arity").get<std::size_t>(), depth});
    if (family == "bethe") return deterministic_family(Bethe{spec.at("arity").get<std::size_t>(), depth});
    if (family == "line")
      return deterministic_family(Line{spec.contains("n") ? spec.at("n").get<std::size_t>() : max_horizon + 1});
    if (family == "star") return deterministic_family(Star{need("n").get<std::size_t>()});
    if (family == "double_cherry") return deterministic_family(DoubleCherry{});
    if (family == "spherically_symmetric")
      return spherically_symmetric(need("degrees").get<std::vector<std::size_t>>());
    if (family == "spider") return spider(need("legs").get<std::vector<std::size_t>>());
    auto off = offspring_of(c, need("offspring"), {"tree", "offspring"});
    return gw_conditioned(off, depth, derive_seed(c.seed, 0)).tree;
  });
}

SubsetFamily subsets_of(const Ctx& c, std::size_t horizon_count) {
  const json& spec = c.b.at("subsets");
  SubsetFamily fam;
  const std::string kind = spec.at("kind");
  fam.kind = kind == "truncation"         ? SubsetFamily::Kind::Truncation
             : kind == "last_generations" ? SubsetFamily::Kind::LastGenerations
                                          : SubsetFamily::Kind::Generation;
  fam.ell = spec.at("ell").get<std::vector<std::size_t>>();
  if (fam.kind == SubsetFamily::Kind::LastGenerations && fam.ell.size() != 1 && fam.ell.size() != horizon_count)
    fail_at(c.text, {"subsets", "ell"}, "'subsets.ell' needs one entry or one per horizon");
  return fam;
}

std::vector<std::size_t> sizes_of(const Ctx& c) {
  auto s = c.b.at("sizes").get<std::vector<std::size_t>>();
  if (s.empty()) fail_at(c.text, {"sizes"}, "'sizes' must not be empty");
  for (auto n : s)
    if (n < 1 || n > kDefaultCatalogCap)
      fail_at(c.text, {"sizes"}, "'sizes' entries must lie in 1.." + std::to_string(kDefaultCatalogCap));
  return s;
}

// First index of the tail used for monotonicity checks.
std::size_t tail_start(std::size_t n) { return n - std::min(n, std::max<std::size_t>(2, (n + 2) / 3)); }

struct Csv {
  std::string text;
  explicit Csv(const std::vector<std::string>& header) { row(header); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text += (i ? "," : "") + cells[i];
    text += "\n";
  }
};

std::string num(double x) { return format_double(x); }
std::string num(std::size_t x) { return std::to_string(x); }
std::string flag(bool b) { return b ? "1" : "0"; }

struct Staged {
  std::vector<std::pair<std::string, std::string>> files;
  json summary = json::object();
  bool pass = true;
};

// ---------------------------------------------------------------- experiments

Staged run_ergodic(const Ctx& c) {
  const auto horizons = horizons_of(c);
  const FiniteKernel q = kernel_of(c);
  const StateFunction f = function_of(c, q.states());
  const Measure nu = initial_of(c, q);
  const SubsetFamily fam = subsets_of(c, horizons.size());
  const ArenaTree tree = tree_of(c, horizons.back());
  const std::size_t mc = c.b.at("mc_replicates");
  const double l2_tol = c.b.at("thresholds").at("l2_tol");
  const double tech_tol = c.b.at("thresholds").at("technical_tol");

  const ErgodicityReport rep = ergodicity_report(q, nu, f, c.b.at("n_max"));
  const double cf = rep.c_f;

  std::vector<std::string> header{"n", "subset_kind", "second_moment", "technical_term", "variance",
                                  "subset_size", "first_moment", "l2_error"};
  if (mc > 0) {
    header.push_back("mc_l2_error");
    header.push_back("mc_stderr");
  }
  Csv csv(header);
  std::vector<double> l2, tech;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const auto subset = fam.build(tree, horizons[i], i);
    if (subset.empty())
      throw std::runtime_error("subset at horizon " + std::to_string(horizons[i]) + " is empty; tree too shallow");
    const auto profile = ancestral_profile(tree, subset);
    const double size = static_cast<double>(subset.size());
    const double second = exact_second_moment(profile, q, nu, f) / (size * size);
    const double first = exact_first_moment(profile, q, nu, f) / size;
    const double err = exact_l2_error(profile, q, nu, f, cf);
    const double term = technical_term(profile, q, nu, f, cf);
    l2.push_back(err);
    tech.push_back(term);
    std::vector<std::string> cells{num(horizons[i]),      fam.name(), num(second),     num(term),
                                   num(second - first * first), num(subset.size()), num(first), num(err)};
    if (mc > 0) {
      L2Estimate est = l2_error_mc(tree, q, nu, f, subset, mc, derive_seed(c.seed, 1 + i), cf, c.threads);
      cells.push_back(num(est.mean_squared_error));
      cells.push_back(num(est.standard_error));
      if (est.standard_error > 0) worst_z = std::max(worst_z, std::abs(est.mean_squared_error - err) / est.standard_error);
    }
    csv.row(cells);
  }

  bool decreasing = true;
  for (std::size_t i = tail_start(l2.size()); i + 1 < l2.size(); ++i)
    if (!(l2[i + 1] < l2[i])) decreasing = false;
  const bool l2_small = l2.back() < l2_tol;
  const bool tech_small = tech.back() < tech_tol;

  Staged out;
  out.files.emplace_back("ergodic.csv", csv.text);
  out.pass = rep.ergodic && decreasing && l2_small && tech_small;
  out.summary = {{"kernel_ergodic", rep.ergodic},
                 {"kernel_reason", rep.reason},
                 {"unique_invariant", rep.unique_invariant},
                 {"c_f", cf},
                 {"tree_size", tree.size()},
                 {"l2_error_final", l2.back()},
                 {"technical_term_final", tech.back()},
                 {"l2_error_decreasing_tail", decreasing},
                 {"l2_error_below_tol", l2_small},
                 {"technical_term_below_tol", tech_small}};
  if (mc > 0) out.summary["mc_max_abs_z"] = worst_z;
  return out;
}

Staged run_assumptions(const Ctx& c) {
  const auto horizons = horizons_of(c);
  if (horizons.size() < 3) fail_at(c.text, {"horizons"}, "'horizons' needs at least 3 entries");
  const bool gw = c.b.contains("offspring");
  if (gw == c.b.contains("tree")) fail_at(c.text, {}, "give exactly one of 'offspring' or 'tree'");
  const SubsetFamily fam = subsets_of(c, horizons.size());
  const json& th = c.b.at("thresholds");
  VerdictThresholds thresholds;
  thresholds.geometric_epsilon = th.at("geometric_epsilon");
  thresholds.k_max = th.at("k_max");
  thresholds.ancestral_epsilon = th.at("ancestral_epsilon");
  if (th.contains("ancestral_k_cap")) thresholds.ancestral_k_cap = th.at("ancestral_k_cap").get<std::size_t>();

  std::vector<PairStatistics> seq;
  std::vector<std::vector<double>> se_d, se_a;
  std::size_t reps = 1;
  GeometricCheck geo;
  AncestralCheck anc;
  Staged out;
  if (gw) {
    const auto off = offspring_of(c, c.b.at("offspring"), {"offspring"});
    if (!(off.mean() > 1.0)) fail_at(c.text, {"offspring"}, "'offspring' must have mean > 1 to condition on survival");
    GwSuiteConfig cfg;
    cfg.horizons = horizons;
    cfg.family = fam;
    cfg.replicates = c.b.at("replicates");
    if (cfg.replicates < 1) fail_at(c.text, {"replicates"}, "'replicates' must be >= 1");
    cfg.seed = c.seed;
    cfg.thresholds = thresholds;
    cfg.threads = c.threads;
    cfg.retry_cap = c.b.at("retry_cap");
    if (c.b.contains("last_generation_ell")) cfg.mass_ell = c.b.at("last_generation_ell").get<std::size_t>();
    GwSuiteResult res = gw_assumption_suite(off, cfg);
    seq = res.averaged;
    se_d = res.distance_cdf_stderr;
    se_a = res.ancestor_tail_stderr;
    reps = cfg.replicates;
    geo = res.geometric;
    anc = res.ancestral;
    out.summary["offspring_mean"] = off.mean();
    out.summary["extinction_probability"] = extinction_probability(off);
    out.summary["per_tree_geometric_pass"] = res.per_tree_geometric_pass;
    out.summary["per_tree_ancestral_pass"] = res.per_tree_ancestral_pass;
    out.summary["total_retries"] = res.total_retries;
    if (cfg.mass_ell) {
      const auto& m = res.last_generation_mass;
      double mean = 0.0;
      for (double x : m) mean += x;
      mean /= static_cast<double>(m.size());
      out.summary["last_generation_mass"] = {{"ell", *cfg.mass_ell},
                                             {"horizon", horizons.back()},
                                             {"mean", mean},
                                             {"stderr", jackknife_standard_error(m)},
                                             {"supercritical_limit_ell0", 1.0 - 1.0 / off.mean()}};
    }
  } else {
    const ArenaTree tree = tree_of(c, horizons.back());
    for (std::size_t i = 0; i < horizons.size(); ++i) {
      const auto subset = fam.build(tree, horizons[i], i);
      if (subset.empty())
        throw std::runtime_error("subset at horizon " + std::to_string(horizons[i]) + " is empty; tree too shallow");
      seq.push_back(pair_statistics(tree, subset));
      se_d.emplace_back(horizons.back() + 1, 0.0);
      se_a.emplace_back(horizons.back() + 1, 0.0);
    }
    geo = geometric_check(seq, thresholds.k_max, thresholds.geometric_epsilon);
    anc = ancestral_check(seq, thresholds.ancestral_epsilon, thresholds.ancestral_k_cap);
    out.summary["tree_size"] = tree.size();
  }

  Csv csv({"horizon", "k", "p_distance_le_k", "p_ancestor_gt_k", "replicates", "stderr", "stderr_ancestor_gt_k"});
  for (std::size_t i = 0; i < horizons.size(); ++i)
    for (std::size_t k = 0; k <= horizons[i]; ++k)
      csv.row({num(horizons[i]), num(k), num(seq[i].distance_cdf(k)), num(seq[i].ancestor_tail(k)), num(reps),
               num(se_d[i].at(k)), num(se_a[i].at(k))});
  out.files.emplace_back("assumption.csv", csv.text);

  out.summary["subsets"] = fam.name();
  out.summary["geometric"] = {{"pass", geo.pass}, {"pass_by_k", geo.pass_by_k}, {"k_max", thresholds.k_max},
                              {"epsilon", thresholds.geometric_epsilon}};
  out.summary["ancestral"] = {{"pass", anc.pass},
                              {"k", anc.k ? json(*anc.k) : json(nullptr)},
                              {"k_cap", anc.k_cap},
                              {"limsup_proxy", anc.limsup_proxy},
                              {"epsilon", thresholds.ancestral_epsilon}};
  out.pass = geo.pass && anc.pass;
  return out;
}

Staged run_variance_scan(const Ctx& c) {
  const auto sizes = sizes_of(c);
  const auto alphas = c.b.at("alphas").get<std::vector<double>>();
  for (double a : alphas)
    if (!(a >= -1.0 && a <= 1.0)) fail_at(c.text, {"alphas"}, "'alphas' entries must lie in [-1, 1]");
  const bool catalog_out = c.b.at("write_catalog");

  Staged out;
  Csv csv({"n", "alpha", "tree_id", "H_value", "is_minimizer", "is_line"});
  json checks = json::array();
  for (std::size_t n : sizes) {
    const FreeTreeCatalog cat = enumerate_free_trees(n);
    std::vector<HosoyaPolynomial> polys;
    std::vector<bool> line;
    std::vector<std::size_t> balanced;
    for (std::size_t i = 0; i < cat.trees.size(); ++i) {
      polys.push_back(hosoya_polynomial(cat.trees[i]));
      line.push_back(is_path(cat.trees[i]));
      if (bipartite_imbalance(cat.trees[i]) == n % 2) balanced.push_back(i);
    }
    if (catalog_out) {
      std::string lines;
      for (std::size_t i = 0; i < cat.trees.size(); ++i) {
        json entry = json::parse(to_json(cat.trees[i]));
        entry["tree_id"] = i;
        entry["code"] = cat.codes[i];
        lines += entry.dump() + "\n";
      }
      out.files.emplace_back("catalog_n" + std::to_string(n) + ".jsonl", lines);
    }
    for (double a : alphas) {
      const Rational exact = rational_from_double(a);
      const auto mins = hosoya_minimizers(cat, exact);
      std::vector<bool> is_min(cat.trees.size(), false);
      for (auto i : mins.indices) is_min[i] = true;
      for (std::size_t i = 0; i < cat.trees.size(); ++i)
        csv.row({num(n), num(a), num(i), num(polys[i](a)), flag(is_min[i]), flag(line[i])});

      std::string expectation;
      bool ok;
      if (a == 0.0 || a == 1.0) {
        expectation = "all trees tie";
        ok = mins.indices.size() == cat.trees.size();
      } else if (a == -1.0) {
        expectation = "minimisers are the balanced-bipartition trees";
        ok = mins.indices == balanced && (n < 5 || mins.indices.size() > 1);
      } else {
        expectation = "line graph is the unique minimiser";
        ok = mins.indices.size() == 1 && line[mins.indices[0]];
      }
      out.pass = out.pass && ok;
      checks.push_back({{"n", n}, {"alpha", a}, {"expectation", expectation}, {"pass", ok},
                        {"minimizers", mins.indices}, {"catalog_size", cat.trees.size()}});
    }
  }
  out.files.emplace(out.files.begin(), "variance_scan.csv", csv.text);
  out.summary["checks"] = checks;
  return out;
}

Staged run_tree_search(const Ctx& c) {
  const auto sizes = sizes_of(c);
  const FiniteKernel q = kernel_of(c);
  const StateFunction f = function_of(c, q.states());
  const InvariantMeasure inv = invariant_measure(q);
  if (!inv.unique) fail_at(c.text, {"kernel"}, "'kernel' must have a unique invariant measure");
  const StateFunction centred = f.array() - inv.measure.integrate(f);
  const SpectralDecomposition spec =
      config_guard(c, {"kernel"}, [&] { return spectral_decompose(q, inv.measure, centred); });
  const double mean = inv.measure.integrate(centred);
  bool informative = false;
  json eig = json::array();
  for (const auto& comp : spec.significant_components()) {
    eig.push_back({{"eigenvalue", comp.eigenvalue}, {"weight", comp.weight}});
    const double a = std::abs(comp.eigenvalue);
    if (a > 1e-9 && a < 1.0 - 1e-9) informative = true;
  }

  Staged out;
  Csv csv({"n", "tree_id", "variance", "gap_to_min", "is_minimizer", "is_line"});
  json checks = json::array();
  for (std::size_t n : sizes) {
    const FreeTreeCatalog cat = enumerate_free_trees(n);
    std::vector<double> var(cat.trees.size());
    parallel_for(cat.trees.size(), resolve_threads(c.threads), [&](std::size_t i) {
      var[i] = stationary_variance(hosoya_polynomial(cat.trees[i]), n, spec, mean);
    });
    const double best = *std::min_element(var.begin(), var.end());
    const double tol = 1e-12 * std::max(std::abs(best), 1e-300);
    std::vector<std::size_t> mins;
    double runner_up = INFINITY;
    for (std::size_t i = 0; i < var.size(); ++i) {
      if (var[i] - best <= tol)
        mins.push_back(i);
      else
        runner_up = std::min(runner_up, var[i]);
    }
    for (std::size_t i = 0; i < var.size(); ++i)
      csv.row({num(n), num(i), num(var[i]), num(var[i] - best),
               flag(std::find(mins.begin(), mins.end(), i) != mins.end()), flag(is_path(cat.trees[i]))});
    const bool unique_line = mins.size() == 1 && is_path(cat.trees[mins[0]]);
    const bool ok = !informative || unique_line;
    out.pass = out.pass && ok;
    checks.push_back({{"n", n},
                      {"pass", ok},
                      {"line_unique_minimizer", unique_line},
                      {"minimum", best},
                      {"gap", std::isfinite(runner_up) ? json(runner_up - best) : json(nullptr)},
                      {"minimizers", mins}});
  }
  out.files.emplace_back("tree_search.csv", csv.text);
  out.summary["informative_function"] = informative;
  out.summary["components"] = eig;
  out.summary["checks"] = checks;
  return out;
}

Staged run_proof_moves(const Ctx& c) {
  std::vector<MoveCase> cases;
  for (const auto& name : c.b.at("cases").get<std::vector<std::string>>())
    cases.push_back(config_guard(c, {"cases"}, [&] { return move_case_from_string(name); }));
  const std::size_t wanted = c.b.at("instances");
  const std::size_t lo = c.b.at("min_size"), hi = c.b.at("max_size");
  const bool decorated = c.b.at("generator") == "decorated";
  if (lo < (decorated ? 4u : 1u) || lo > hi || hi > 4096)
    fail_at(c.text, {"min_size"}, "need 1 <= min_size <= max_size <= 4096 (min_size >= 4 when decorated)");
  const std::size_t cap = wanted * std::max<std::size_t>(1, c.b.at("max_attempts_factor").get<std::size_t>());
  std::optional<Rational> fixed;
  if (c.b.contains("alpha")) fixed = rational_from_double(c.b.at("alpha").get<double>());

  struct Attempt {
    std::size_t n = 0;
    Rational alpha;
    MoveOutcome outcome;
  };

  Staged out;
  Csv csv({"case", "instance", "attempt", "n", "alpha", "delta", "bound", "pass"});
  json per_case = json::object();
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const MoveCase mc = cases[ci];
    const std::uint64_t case_seed = derive_seed(c.seed, ci);
    const bool positive = mc == MoveCase::Case1;
    std::size_t applied = 0, attempts = 0, failures = 0;
    double min_delta = INFINITY;
    std::map<std::string, std::size_t> refusals;
    const std::size_t batch = std::max<std::size_t>(wanted, 256);
    while (applied < wanted && attempts < cap) {
      const std::size_t count = std::min(batch, cap - attempts);
      std::vector<Attempt> results(count, Attempt{0, 0, MoveRefusal{}});
      parallel_for(count, resolve_threads(c.threads), [&](std::size_t j) {
        Rng rng(derive_seed(case_seed, attempts + j));
        Attempt& a = results[j];
        a.n = lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
        ArenaTree t = decorated ? random_move_instance(a.n, rng) : random_labelled_tree(a.n, rng);
        a.alpha = fixed ? *fixed : Rational(static_cast<long long>(1 + rng.below(999)), 1000);
        if (!fixed && !positive) a.alpha = -a.alpha;
        a.outcome = proof_move(t, mc, a.alpha);
      });
      for (std::size_t j = 0; j < count && applied < wanted; ++j) {
        const Attempt& a = results[j];
        if (const auto* refusal = std::get_if<MoveRefusal>(&a.outcome)) {
          ++refusals[refusal->condition];
          continue;
        }
        const auto& r = std::get<MoveResult>(a.outcome);
        bool ok = r.delta > 0 && r.delta >= r.bound;
        if (mc == MoveCase::Case3a) ok = ok && r.delta == r.bound;
        if (!ok) ++failures;
        min_delta = std::min(min_delta, static_cast<double>(r.delta));
        csv.row({to_string(mc), num(applied), num(attempts + j), num(a.n), num(static_cast<double>(a.alpha)),
                 num(static_cast<double>(r.delta)), num(static_cast<double>(r.bound)), flag(ok)});
        ++applied;
      }
      attempts += count;
    }
    json refusal_json = json::object();
    for (auto& [cond, k] : refusals) refusal_json[cond] = k;
    const bool ok = failures == 0 && applied > 0;
    out.pass = out.pass && ok;
    per_case[to_string(mc)] = {{"requested", wanted},
                               {"applied", applied},
                               {"attempts", attempts},
                               {"failures", failures},
                               {"min_delta", std::isfinite(min_delta) ? json(min_delta) : json(nullptr)},
                               {"refusals", refusal_json},
                               {"pass", ok}};
  }
  out.files.emplace_back("proof_moves.csv", csv.text);
  out.summary["cases"] = per_case;
  return out;
}

std::string utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& data) {
  std::ofstream o(p, std::ios::binary | std::ios::trunc);
  if (!o) throw std::runtime_error("cannot write " + p.string());
  o << data;
  o.close();
  if (!o) throw std::runtime_error("failed writing " + p.string());
}

void check_fresh(const fs::path& dir, const std::vector<std::string>& names) {
  for (const auto& name : names)
    if (fs::exists(dir / name)) throw std::runtime_error("refusing to overwrite existing output " + (dir / name).string());
}

// Writes every output under a temporary name first, then renames them into
// place; the manifest goes last.
void commit(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  fs::create_directories(dir);
  std::vector<std::string> names;
  for (const auto& [name, data] : files) names.push_back(name);
  check_fresh(dir, names);
  std::vector<fs::path> temps;
  try {
    for (const auto& [name, data] : files) {
      fs::path tmp = dir / ("." + name + ".tmp");
      write_file(tmp, data);
      temps.push_back(tmp);
    }
    for (std::size_t i = 0; i < files.size(); ++i) fs::rename(temps[i], dir / files[i].first);
  } catch (...) {
    for (const auto& t : temps) fs::remove(t);
    throw;
  }
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> experiment_kinds() {
  std::vector<std::string> out;
  for (const auto& [name, info] : kinds()) out.push_back(name);
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t byte = std::min(e.byte, text.size());
    std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte > 0 ? byte - 1 : 0), '\n'));
    throw ConfigError("line " + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("line 1: config must be a JSON object");
  if (!doc.contains("experiment") || !doc["experiment"].is_string())
    throw ConfigError("line " + std::to_string(line_of(text, {"experiment"})) +
                      ": missing string key 'experiment'");
  const std::string kind = doc["experiment"];
  auto it = kinds().find(kind);
  if (it == kinds().end()) {
    std::string allowed;
    for (const auto& k : experiment_kinds()) allowed += (allowed.empty() ? "" : ", ") + k;
    throw ConfigError("line " + std::to_string(line_of(text, {"experiment"})) + ": unknown experiment '" + kind +
                      "' (known: " + allowed + ")");
  }
  validate(doc, it->second.fields, {}, text);
  return ExperimentConfig{kind, std::move(doc), text};
}

namespace {

void describe_fields(std::ostringstream& out, const std::vector<Field>& fields, const std::string& prefix) {
  for (const auto& f : fields) {
    out << "  " << prefix << f.key << " (" << type_name(f.type) << ")";
    if (f.required)
      out << " required";
    else if (!f.fallback.is_null() && f.type != Type::Object)
      out << " default " << f.fallback.dump();
    else if (f.fallback.is_null())
      out << " optional";
    out << ": " << f.doc;
    if (!f.choices.empty()) {
      out << " [";
      for (std::size_t i = 0; i < f.choices.size(); ++i) out << (i ? "|" : "") << f.choices[i];
      out << "]";
    }
    out << "\n";
    if (f.type == Type::Object) describe_fields(out, f.nested, prefix + f.key + ".");
  }
}

}  // namespace

std::string describe(const std::string& kind) {
  auto it = kinds().find(kind);
  if (it == kinds().end()) throw std::invalid_argument("unknown experiment kind '" + kind + "'");
  std::ostringstream out;
  out << kind << ": " << it->second.summary << "\n";
  out << "Verifies: " << it->second.verifies << "\n";
  out << "Keys:\n";
  describe_fields(out, it->second.fields, "");
  out << "Exit status: 0 PASS, 2 verdict FAIL, 1 error.\n";
  return out.str();
}

RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const std::string started_utc = utc_now();
  json body = config.body;
  if (options.seed) body["seed"] = *options.seed;
  int threads = body.at("threads").get<int>();
  if (options.threads) {
    threads = *options.threads;
  } else if (threads <= 0) {
    if (const char* env = std::getenv("TREEMC_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        throw ConfigError("TREEMC_THREADS must be an integer, got '" + std::string(env) + "'");
      }
    }
  }
  const fs::path dir = options.out_dir ? *options.out_dir : fs::path(body.at("output_dir").get<std::string>());
  const std::uint64_t seed = body.at("seed");

  json hashed = body;
  hashed.erase("threads");
  hashed.erase("output_dir");
  const std::string config_hash = sha256_hex(hashed.dump());

  Ctx ctx{body, config.source, seed, threads};
  Staged staged;
  std::vector<std::string> planned{"summary.json", "manifest.json"};
  check_fresh(dir, planned);
  if (config.kind == "ergodic_convergence")
    staged = run_ergodic(ctx);
  else if (config.kind == "assumption_suite")
    staged = run_assumptions(ctx);
  else if (config.kind == "variance_scan")
    staged = run_variance_scan(ctx);
  else if (config.kind == "tree_search")
    staged = run_tree_search(ctx);
  else
    staged = run_proof_moves(ctx);

  const std::string verdict = staged.pass ? "PASS" : "FAIL";
  json summary = {{"experiment", config.kind}, {"verdict", verdict}, {"seed", seed}, {"details", staged.summary}};
  staged.files.emplace_back("summary.json", summary.dump(2) + "\n");

  RunOutcome out;
  out.out_dir = dir;
  out.verdict_pass = staged.pass;
  out.summary = summary;
  json outputs = json::object();
  for (const auto& [name, data] : staged.files) {
    out.checksums[name] = sha256_hex(data);
    outputs[name] = out.checksums[name];
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json manifest = {{"tool", "treemc"},
                   {"tool_version", kToolVersion},
                   {"experiment", config.kind},
                   {"config_sha256", config_hash},
                   {"config", hashed},
                   {"seed", seed},
                   {"threads", resolve_threads(threads)},
                   {"started_utc", started_utc},
                   {"wall_clock_seconds", wall},
                   {"verdict", verdict},
                   {"outputs", outputs}};
  staged.files.emplace_back("manifest.json", manifest.dump(2) + "\n");
  commit(dir, staged.files);
  out.exit_code = staged.pass ? kExitOk : kExitVerdictFail;
  out.message = config.kind + ": " + verdict + " (" + dir.string() + ")";
  return out;
}

RunOutcome run_config_file(const fs::path& path, const RunOptions& options) {
  RunOutcome out;
  try {
    ExperimentConfig cfg = parse_config(read_file(path));
    return run_experiment(cfg, options);
  } catch (const ConfigError& e) {
    out.message = path.string() + ": " + e.what();
  } catch (const std::exception& e) {
    out.message = std::string("error: ") + e.what();
  }
  out.exit_code = kExitError;
  out.verdict_pass = false;
  return out;
}

}  // namespace treemc
