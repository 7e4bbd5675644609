#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "treemc/errors.hpp"
#include "treemc/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace treemc;

namespace {

std::string binary() {
  const char* b = std::getenv("TREEMC_BIN");
  REQUIRE_MESSAGE(b != nullptr, "TREEMC_BIN must point at the treemc executable");
  return b;
}

fs::path scratch() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() / ("treemc_cli_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

struct Run {
  int status;
  std::string output;
};

Run run(const std::string& args, const std::string& env = "") {
  const fs::path log = scratch() / "last.log";
  const std::string cmd = env + " " + binary() + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

const char* kScan = R"({
  "experiment": "variance_scan",
  "sizes": [6],
  "alphas": [-1, -0.5, 0, 0.5, 1]
})";

const char* kErgodic = R"({
  "experiment": "ergodic_convergence",
  "kernel": {"matrix": [[0.75, 0.25], [0.25, 0.75]]},
  "initial": {"kind": "dirac", "state": 0},
  "function": [1, -1],
  "tree": {"family": "complete_dary", "arity": 2},
  "horizons": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
  "thresholds": {"l2_tol": 0.005, "technical_tol": 0.005}
})";

const char* kMoves = R"({
  "experiment": "proof_moves",
  "instances": 50,
  "generator": "decorated"
})";

}  // namespace

TEST_CASE("sha256 test vector") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("variance scan marks only the line away from -1, 0, 1") {
  fs::path out = scratch() / "scan";
  Run r = run("run " + write_config("scan.json", kScan).string() + " --out " + out.string());
  REQUIRE(r.status == 0);
  auto rows = read_csv(out / "variance_scan.csv");
  REQUIRE(rows.size() == 1 + 5 * 6);
  CHECK(rows[0] == std::vector<std::string>{"n", "alpha", "tree_id", "H_value", "is_minimizer", "is_line"});
  std::map<std::string, std::size_t> minimisers;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    minimisers[row[1]] += row[4] == "1";
    if (row[1] == "0.5" || row[1] == "-0.5") CHECK(row[4] == row[5]);
  }
  CHECK(minimisers["0.5"] == 1);
  CHECK(minimisers["-0.5"] == 1);
  CHECK(minimisers["0"] == 6);
  CHECK(minimisers["1"] == 6);
  CHECK(minimisers["-1"] >= 2);
  CHECK(fs::exists(out / "catalog_n6.jsonl"));
  std::ifstream cat(out / "catalog_n6.jsonl");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(cat, line)) {
    json j = json::parse(line);
    CHECK(j.at("parents").size() == 6);
    ++lines;
  }
  CHECK(lines == 6);
}

TEST_CASE("ergodic convergence column decreases") {
  fs::path out = scratch() / "ergodic";
  Run r = run("run " + write_config("ergodic.json", kErgodic).string() + " --out " + out.string());
  REQUIRE(r.status == 0);
  auto rows = read_csv(out / "ergodic.csv");
  REQUIRE(rows.size() == 11);
  CHECK(rows[0][0] == "n");
  CHECK(rows[0][7] == "l2_error");
  for (std::size_t i = 2; i < rows.size(); ++i) CHECK(std::stod(rows[i][7]) < std::stod(rows[i - 1][7]));
  const std::string text = slurp(out / "ergodic.csv");
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.back() == '\n');
}

TEST_CASE("manifest records checksums and settings") {
  fs::path out = scratch() / "manifest";
  Run r = run("run " + write_config("m.json", kErgodic).string() + " --out " + out.string() + " --seed 99 --threads 2");
  REQUIRE(r.status == 0);
  json m = json::parse(slurp(out / "manifest.json"));
  CHECK(m.at("tool") == "treemc");
  CHECK(m.at("tool_version") == kToolVersion);
  CHECK(m.at("seed") == 99);
  CHECK(m.at("threads") == 2);
  CHECK(m.at("verdict") == "PASS");
  CHECK(m.at("config").at("thresholds").at("l2_tol") == 0.005);
  CHECK(m.at("config_sha256").get<std::string>().size() == 64);
  for (const auto& [name, digest] : m.at("outputs").items()) CHECK(sha256_hex(slurp(out / name)) == digest);
  CHECK(m.at("outputs").contains("ergodic.csv"));
  CHECK(m.at("outputs").contains("summary.json"));

  fs::path env_out = scratch() / "manifest_env";
  REQUIRE(run("run " + write_config("m2.json", kErgodic).string() + " --out " + env_out.string(), "TREEMC_THREADS=3").status == 0);
  CHECK(json::parse(slurp(env_out / "manifest.json")).at("threads") == 3);
}

TEST_CASE("identical config and seed give identical bytes") {
  const fs::path cfg = write_config("moves.json", kMoves);
  fs::path a = scratch() / "det_a", b = scratch() / "det_b", c = scratch() / "det_c";
  REQUIRE(run("run " + cfg.string() + " --out " + a.string() + " --threads 1").status == 0);
  REQUIRE(run("run " + cfg.string() + " --out " + b.string() + " --threads 4").status == 0);
  REQUIRE(run("run " + cfg.string() + " --out " + c.string() + " --seed 5").status == 0);
  CHECK(slurp(a / "proof_moves.csv") == slurp(b / "proof_moves.csv"));
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  CHECK(slurp(a / "proof_moves.csv") != slurp(c / "proof_moves.csv"));
  json ma = json::parse(slurp(a / "manifest.json")), mb = json::parse(slurp(b / "manifest.json"));
  CHECK(ma.at("outputs") == mb.at("outputs"));
  CHECK(ma.at("config_sha256") == mb.at("config_sha256"));
}

TEST_CASE("outputs are write-once") {
  const fs::path cfg = write_config("once.json", kScan);
  fs::path out = scratch() / "once";
  REQUIRE(run("run " + cfg.string() + " --out " + out.string()).status == 0);
  const std::string before = slurp(out / "manifest.json");
  Run again = run("run " + cfg.string() + " --out " + out.string());
  CHECK(again.status == 1);
  CHECK(again.output.find("existing") != std::string::npos);
  CHECK(slurp(out / "manifest.json") == before);
}

TEST_CASE("malformed configs exit 1 without outputs") {
  fs::path out = scratch() / "bad";
  Run unknown = run("run " + write_config("bad1.json", "{\n  \"experiment\": \"tree_search\",\n  \"bogus\": 1\n}\n").string() +
                    " --out " + out.string());
  CHECK(unknown.status == 1);
  CHECK(unknown.output.find("line 3") != std::string::npos);
  CHECK(!fs::exists(out));

  Run syntax = run("run " + write_config("bad2.json", "{\n  \"experiment\": \"tree_search\",\n  \"sizes\": [4,\n").string() +
                   " --out " + out.string());
  CHECK(syntax.status == 1);
  CHECK(syntax.output.find("line") != std::string::npos);
  CHECK(!fs::exists(out));

  Run type = run("run " +
                 write_config("bad3.json", "{\n  \"experiment\": \"variance_scan\",\n  \"sizes\": [4],\n  \"alphas\": \"x\"\n}\n")
                     .string() +
                 " --out " + out.string());
  CHECK(type.status == 1);
  CHECK(type.output.find("line 4") != std::string::npos);

  Run missing = run("run " + (scratch() / "nope.json").string());
  CHECK(missing.status == 1);

  Run cap = run("run " + write_config("bad4.json", R"({"experiment": "variance_scan", "sizes": [17]})").string() +
                " --out " + out.string());
  CHECK(cap.status == 1);
  CHECK(!fs::exists(out));
}

TEST_CASE("failed verdicts exit 2") {
  const char* line = R"({
  "experiment": "assumption_suite",
  "tree": {"family": "line"},
  "horizons": [4, 6, 8, 10, 12]
})";
  fs::path out = scratch() / "line";
  Run r = run("run " + write_config("line.json", line).string() + " --out " + out.string());
  CHECK(r.status == 2);
  CHECK(json::parse(slurp(out / "summary.json")).at("verdict") == "FAIL");
  CHECK(fs::exists(out / "assumption.csv"));
}

TEST_CASE("describe") {
  Run ts = run("describe tree_search");
  CHECK(ts.status == 0);
  CHECK(ts.output.find("line graph") != std::string::npos);
  CHECK(ts.output.find("sizes") != std::string::npos);
  Run as = run("describe assumption_suite");
  CHECK(as.status == 0);
  CHECK(as.output.find("geometrical") != std::string::npos);
  CHECK(as.output.find("ancestral") != std::string::npos);
  CHECK(as.output.find("Galton-Watson") != std::string::npos);
  Run bogus = run("describe bogus");
  CHECK(bogus.status == 1);
  CHECK(bogus.output.find("variance_scan") != std::string::npos);
  for (const auto& kind : experiment_kinds()) CHECK_FALSE(describe(kind).empty());
  CHECK_THROWS_AS(describe("bogus"), std::invalid_argument);
  CHECK(run("").status == 1);
}

TEST_CASE("config parsing in process") {
  ExperimentConfig cfg = parse_config(kScan);
  CHECK(cfg.kind == "variance_scan");
  CHECK(cfg.body.at("seed") == 1);
  CHECK(cfg.body.at("write_catalog") == true);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "nope"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sizes": [4]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "variance_scan"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "proof_moves", "cases": ["case9"]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "proof_moves", "seed": -1})"), ConfigError);
  try {
    parse_config("{\n\"experiment\": \"ergodic_convergence\",\n\"kernel\": {\"matrix\": [[1]], \"extra\": 2},\n"
                 "\"function\": [1], \"tree\": {\"family\": \"line\"}, \"horizons\": [1]}");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("line 3:", 0) == 0);
  }
}

TEST_CASE("cleanup") { fs::remove_all(scratch()); }
