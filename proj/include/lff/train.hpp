#pragma once

#include <cstdint>
#include <memory>

#include "lff/dataset.hpp"
#include "lff/oracle.hpp"

namespace lff {

struct ModelSpec {
  enum class Kind { Linear, Mlp };
  Kind kind = Kind::Mlp;
  int hidden = 32;  // ignored for linear
};

struct TrainOptions {
  int epochs = 150;
  double learning_rate = 0.1;
  int batch_size = 32;
};

struct TrainResult {
  std::shared_ptr<Model> model;
  double train_accuracy = 0.0;
};

// Training loss went non-finite; carries the offending epoch.
struct TrainingDivergedError : std::runtime_error {
  explicit TrainingDivergedError(int epoch_index)
      : std::runtime_error("training diverged at epoch " + std::to_string(epoch_index)),
        epoch(epoch_index) {}
  int epoch;
};

// Seeded init + mini-batch SGD on cross-entropy. Deterministic given
// (data, spec, seed, options); epochs = 0 returns the raw initialization.
TrainResult train(const std::vector<Example>& data, int dim, int classes,
                  const ModelSpec& spec, std::uint64_t seed, const TrainOptions& opts);

}  // namespace lff
