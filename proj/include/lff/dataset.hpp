#pragma once

#include <cstdint>
#include <vector>

#include "lff/numeric.hpp"

namespace lff {

struct Example {
  Vec x;
  int label = 0;
};

// Gaussian-cluster generator spec. Cluster centers are rejection-sampled so
// every pair is at least 4x spread apart, which keeps clean accuracy near 1.
struct DatasetSpec {
  int dim = 20;
  int classes = 5;
  int train_per_class = 200;
  int test_per_class = 100;
  double spread = 0.06;
  double box_lo = 0.0;
  double box_hi = 1.0;

  void validate() const;
};

struct Dataset {
  DatasetSpec spec;
  std::uint64_t seed = 0;
  std::vector<Vec> centers;       // one per class
  std::vector<Example> train;
  std::vector<Example> test;
};

// Deterministic given (spec, seed). Throws std::runtime_error if centers
// cannot be placed with the required separation inside the box.
Dataset generate_dataset(const DatasetSpec& spec, std::uint64_t seed);

double accuracy(const class Model& model, const std::vector<Example>& data);

}  // namespace lff
