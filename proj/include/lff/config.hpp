#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lff/attacker.hpp"
#include "lff/dataset.hpp"
#include "lff/engine.hpp"
#include "lff/train.hpp"

namespace lff {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  std::string name;
  ModelSpec spec;
  std::uint64_t seed = 1;
  TrainOptions train;
};

// One attack entry: an inner attacker, optionally wrapped by the future
// refinement, plus budget overrides and a baseline for increment reporting.
struct AttackConfig {
  std::string name;
  InnerConfig inner;
  std::optional<LffConfig> lff;
  Budget budget;
  int iterations = 16;
  std::string baseline;  // empty: no increment reference
};

struct ExperimentConfig {
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  LossMode::Kind mode = LossMode::Kind::Untargeted;

  DatasetSpec dataset;
  std::uint64_t dataset_seed = 9;

  std::vector<ModelConfig> models;
  std::vector<std::string> surrogate;  // model names; > 1 means ensemble surrogate
  std::vector<std::string> victims;    // model names

  Budget budget;       // defaults for attacks without overrides
  int iterations = 16;

  std::vector<AttackConfig> attacks;

  const ModelConfig& model_config(const std::string& name) const;
  const AttackConfig* find_attack(const std::string& name) const;
  std::string surrogate_id() const;
  void validate() const;
};

// Strict parser for the flat "key = value" format; unknown keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Canonical serialization (sorted keys) and its FNV-1a hash; every output
// file carries the hash so runs can be traced back to their configuration.
std::string canonical_config(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

// The frozen default experiment used by the regression suite.
std::string default_config_text();
ExperimentConfig default_experiment();

}  // namespace lff
