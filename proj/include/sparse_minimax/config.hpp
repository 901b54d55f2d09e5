#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sparse_minimax/proof_events.hpp"
#include "sparse_minimax/risk_lab.hpp"

namespace sparse_minimax {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` text; '#' starts a comment, blank lines are ignored and
/// a repeated key overrides the earlier one.
struct KeyValueConfig {
  std::vector<std::pair<std::string, std::string>> entries;

  std::optional<std::string> get(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
};

KeyValueConfig parse_key_values(const std::string& text);
std::string read_text_file(const std::string& path);

/// Unknown keys and malformed values raise ConfigError. The result is not
/// validated; call validate() on it.
ExperimentConfig experiment_from(const KeyValueConfig& kv);
ProofRunConfig proof_run_from(const KeyValueConfig& kv);

/// Canonical `key = value` rendering of every field (amplitudes resolved), so
/// that parsing it back reproduces the run.
std::string to_config_text(const ExperimentConfig& config);
std::string to_config_text(const ProofRunConfig& config);

/// Shortest text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace sparse_minimax
