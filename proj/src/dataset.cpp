#include "lff/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lff/oracle.hpp"
#include "lff/rng.hpp"

namespace lff {

void DatasetSpec::validate() const {
  if (classes < 2) throw std::invalid_argument("dataset: classes must be >= 2");
  if (dim < 1) throw std::invalid_argument("dataset: dim must be >= 1");
  if (train_per_class < 1 || test_per_class < 0) {
    throw std::invalid_argument("dataset: per-class counts invalid");
  }
  if (!(spread >= 0.0)) throw std::invalid_argument("dataset: spread must be >= 0");
  if (!(box_lo < box_hi)) throw std::invalid_argument("dataset: box_lo must be < box_hi");
}

namespace {

double l2_dist(const Vec& a, const Vec& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

Vec sample_point(Rng& rng, const Vec& center, double spread, double lo, double hi) {
  Vec x(center.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = center[i];
    if (spread > 0.0) v += spread * rng.normal();
    x[i] = std::min(std::max(v, lo), hi);
  }
  return x;
}

}  // namespace

Dataset generate_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  spec.validate();
  Dataset ds;
  ds.spec = spec;
  ds.seed = seed;

  Rng rng(mix_seed(seed, 0x6461746173657431ULL));

  // Keep centers off the box walls so clusters are not half-clipped.
  const double span = spec.box_hi - spec.box_lo;
  const double margin = std::min(0.2 * span, 4.0 * spec.spread);
  const double lo = spec.box_lo + margin;
  const double hi = spec.box_hi - margin;
  const double min_sep = 4.0 * spec.spread;

  const int max_attempts = 20000;
  int attempts = 0;
  while (static_cast<int>(ds.centers.size()) < spec.classes) {
    if (++attempts > max_attempts) {
      throw std::runtime_error("generate_dataset: could not place class centers in box");
    }
    Vec c(spec.dim);
    for (int i = 0; i < spec.dim; ++i) c[i] = rng.uniform(lo, hi);
    bool ok = true;
    for (const Vec& other : ds.centers) {
      if (l2_dist(c, other) < min_sep) {
        ok = false;
        break;
      }
    }
    if (ok) ds.centers.push_back(std::move(c));
  }

  for (int k = 0; k < spec.classes; ++k) {
    for (int i = 0; i < spec.train_per_class; ++i) {
      ds.train.push_back({sample_point(rng, ds.centers[k], spec.spread, spec.box_lo, spec.box_hi), k});
    }
  }
  for (int k = 0; k < spec.classes; ++k) {
    for (int i = 0; i < spec.test_per_class; ++i) {
      ds.test.push_back({sample_point(rng, ds.centers[k], spec.spread, spec.box_lo, spec.box_hi), k});
    }
  }
  return ds;
}

double accuracy(const Model& model, const std::vector<Example>& data) {
  if (data.empty()) return 0.0;
  int correct = 0;
  for (const Example& e : data) {
    if (model.predict(e.x) == e.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace lff
