#pragma once

#include <stdexcept>
#include <string>

namespace treemc {

// Invalid arguments (bad vertex ids, empty subsets, malformed pmfs) are
// reported with std::invalid_argument. The types below cover the remaining
// failure classes.

/// A configured size cap (vertex count, catalog size) would be exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejection sampling gave up after its retry cap.
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called on inputs outside its mathematical contract,
/// e.g. a spectral decomposition of a non-reversible kernel.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Experiment configuration failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace treemc
