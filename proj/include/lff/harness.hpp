#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lff/config.hpp"
#include "lff/dataset.hpp"
#include "lff/engine.hpp"
#include "lff/oracle.hpp"

namespace lff {

struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AttackOutput {
  int example_index = 0;  // index into the test split
  Vec clean;
  Vec adversarial;
  AttackTrace trace;
};

struct AttackRun {
  AttackConfig attack;
  LossMode::Kind mode = LossMode::Kind::Untargeted;
  std::vector<AttackOutput> outputs;  // only the attacked examples
  std::vector<int> targets;           // per test-split example; targeted mode only
  std::uint64_t oracle_calls = 0;
  double wall_ms = 0.0;
};

struct ReportRow {
  std::string surrogate;
  std::string victim;
  std::string attack;
  double clean_acc = 0.0;
  double asr = 0.0;
  double inc = 0.0;
  std::uint64_t oracle_calls = 0;
  double wall_ms = 0.0;  // measured; serialized as 0 so reports stay bitwise-stable
};

struct TransferReport {
  std::vector<ReportRow> rows;
  std::string config_hash;

  // Header comment with the config hash, then the pinned column header.
  void write_csv(std::ostream& os) const;
  const ReportRow* find(const std::string& attack, const std::string& victim) const;
  double mean_victim_asr(const std::string& attack, const std::string& surrogate_name) const;
};

// Trained models for one experiment, keyed by config model name.
struct ModelZoo {
  std::map<std::string, std::shared_ptr<Model>> by_name;
  std::map<std::string, double> train_accuracy;
  std::shared_ptr<Model> surrogate;  // single model or ensemble per config

  const Model& get(const std::string& name) const;
};

// Deterministic per-example targeted labels: uniform over the other classes.
std::vector<int> draw_targets(const Dataset& ds, int classes, std::uint64_t seed);

ModelZoo train_models(const ExperimentConfig& cfg, const Dataset& ds);

// Attacks every eligible test example (untargeted: surrogate classifies it
// correctly; targeted: not already the target) and enforces the budget/box
// invariants on every output. jobs > 1 runs examples on a worker pool; the
// result is identical for any jobs value.
AttackRun run_attack(const AttackConfig& attack, LossMode::Kind mode, const Model& surrogate,
                     const Dataset& ds, std::uint64_t experiment_seed, int jobs);

// ASR per victim. The denominator for a victim is the set of attacked
// examples that the victim also classifies correctly when clean; targeted ASR
// counts outputs classified as the target instead.
TransferReport evaluate(const std::vector<AttackRun>& runs, const ExperimentConfig& cfg,
                        const ModelZoo& zoo, const Dataset& ds);

// Full pipeline: dataset, training, every configured attack, evaluation.
struct ExperimentResult {
  Dataset dataset;
  ModelZoo zoo;
  std::vector<AttackRun> runs;
  TransferReport report;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs);

// Reuses an already-built dataset/zoo (the sweep path).
ExperimentResult run_experiment_on(const ExperimentConfig& cfg, const Dataset& ds,
                                   const ModelZoo& zoo, int jobs);

enum class SweepAxis { FutureSteps, FuturePenalty };

struct SweepPoint {
  double value = 0.0;
  TransferReport report;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::FutureSteps;
  std::vector<SweepPoint> points;  // values strictly increasing
};

// Re-runs the experiment once per axis value, overriding Q or beta on every
// attack that carries the refinement config. Values must be strictly
// increasing; duplicates are rejected.
SweepResult sweep(const ExperimentConfig& cfg, SweepAxis axis, std::vector<double> values,
                  int jobs);

void write_sweep_summary(std::ostream& os, const SweepResult& sr, const ExperimentConfig& cfg);

}  // namespace lff
