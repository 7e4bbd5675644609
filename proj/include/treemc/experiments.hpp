#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace treemc {

inline constexpr const char* kToolVersion = "1.0.0";

/// Process exit statuses of `treemc run`.
enum ExitStatus : int { kExitOk = 0, kExitError = 1, kExitVerdictFail = 2 };

/// A validated experiment description. `body` holds every schema key with
/// defaults filled in.
struct ExperimentConfig {
  std::string kind;
  nlohmann::json body;
  std::string source;
};

std::vector<std::string> experiment_kinds();

/// Parses and schema-checks a config document. Throws ConfigError whose
/// message starts with "line N:" locating the offending key.
ExperimentConfig parse_config(const std::string& text);

/// Schema, defaults and the property verified, as printable text. Throws
/// std::invalid_argument for an unknown kind.
std::string describe(const std::string& kind);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
};

struct RunOutcome {
  int exit_code = kExitOk;
  bool verdict_pass = true;
  std::filesystem::path out_dir;
  /// Output file name -> SHA-256 hex digest, manifest excluded.
  std::map<std::string, std::string> checksums;
  nlohmann::json summary;
  std::string message;
};

/// Runs a validated config. All outputs are staged in memory and only
/// written once the experiment has finished; existing files in the output
/// directory are never replaced. Throws on errors.
RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options);

/// Reads, validates and runs a config file, mapping every failure to
/// kExitError with a message instead of throwing.
RunOutcome run_config_file(const std::filesystem::path& path, const RunOptions& options);

/// Hex SHA-256 digest.
std::string sha256_hex(const std::string& data);

/// Formats a double with 17 significant digits.
std::string format_double(double x);

}  // namespace treemc
