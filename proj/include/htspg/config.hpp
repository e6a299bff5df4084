#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "htspg/envs.hpp"
#include "htspg/errors.hpp"
#include "htspg/features.hpp"
#include "htspg/optimizers.hpp"
#include "htspg/policy.hpp"

namespace htspg {

// One training experiment. parse_config() fills every field, resolving
// environment-dependent defaults (sigma, feature map, gamma, iterations).
struct ExperimentConfig {
  std::string env;
  FamilyKind family = FamilyKind::kCauchy;
  double sigma = 0.0;
  double nu = 2.0;
  std::string features;  // "identity" | "poly:<deg>" | "rbf:<points>:<bw>"
  OptimizerKind optimizer = OptimizerKind::kHtspg;
  double eta = 0.01;
  double beta = 0.2;
  double max_grad_norm = 1000.0;  // 0 disables the clip
  bool paired_rng = true;
  double gamma = 0.81;
  std::size_t batch_size = 10;
  std::size_t iterations = 500;
  std::size_t eval_every = 10;
  std::size_t eval_episodes = 20;
  std::vector<std::uint64_t> seeds;
  std::string output;

  PolicyFamily policy_family() const { return {family, nu}; }
  // Builds the feature map for `env_spec` (keeps the environment's input scaling).
  FeatureMap feature_map(const EnvSpec& env_spec) const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Thrown by parse_config with every problem found, one per line.
class ConfigErrors : public ConfigError {
 public:
  explicit ConfigErrors(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

// Parses the `key = value` format: one assignment per line, `#` starts a
// comment, blank lines ignored. `env` and `optimizer` are required.
// `overrides` are "key=value" strings applied after the text (they may
// replace keys set in the text). Throws ConfigErrors listing all problems.
ExperimentConfig parse_config(std::string_view text,
                              const std::vector<std::string>& overrides = {});

// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

// The recipe `print-default-config` emits for an environment.
ExperimentConfig default_config(std::string_view env);

}  // namespace htspg
