#include "lff/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace lff {

namespace {

void check_label(const LossMode& mode, int classes) {
  if (mode.label < 0 || mode.label >= classes) {
    throw std::invalid_argument("loss mode: label out of range");
  }
}

// CE loss and d(loss)/d(logits) = softmax(z) - onehot(y).
double ce_from_logits(const Vec& z, int y, Vec& dz) {
  const Vec p = softmax(z);
  dz = p;
  dz[y] -= 1.0;
  const double py = std::max(p[y], 1e-300);
  return -std::log(py);
}

}  // namespace

int Model::predict(const Vec& x) const {
  const Vec z = logits(x);
  int best = 0;
  for (std::size_t k = 1; k < z.size(); ++k) {
    if (z[k] > z[best]) best = static_cast<int>(k);
  }
  return best;
}

Vec softmax(const Vec& logits) {
  double m = logits[0];
  for (double z : logits) m = std::max(m, z);
  Vec p(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - m);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

Vec log_softmax(const Vec& logits) {
  double m = logits[0];
  for (double z : logits) m = std::max(m, z);
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  const double lse = m + std::log(sum);
  Vec out(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) out[k] = logits[k] - lse;
  return out;
}

// ---------------------------------------------------------------------------
// LinearSoftmaxModel

LinearSoftmaxModel::LinearSoftmaxModel(int inputs, int classes)
    : inputs_(inputs), classes_(classes) {
  if (inputs < 1 || classes < 2) {
    throw std::invalid_argument("linear model: need inputs >= 1, classes >= 2");
  }
  weights.assign(classes, Vec(inputs, 0.0));
  biases.assign(classes, 0.0);
}

void LinearSoftmaxModel::validate() const {
  for (const Vec& w : weights) require_finite(w, "linear weights");
  require_finite(biases, "linear biases");
}

Vec LinearSoftmaxModel::logits(const Vec& x) const {
  if (static_cast<int>(x.size()) != inputs_) {
    throw std::invalid_argument("linear model: input has wrong dimension");
  }
  Vec z(classes_);
  for (int k = 0; k < classes_; ++k) z[k] = dot(weights[k], x) + biases[k];
  return z;
}

double LinearSoftmaxModel::loss_and_grad(const Vec& x, const LossMode& mode, Vec& grad) const {
  check_label(mode, classes_);
  if (static_cast<int>(x.size()) != inputs_) {
    throw std::invalid_argument("linear model: input has wrong dimension");
  }
  require_finite(x, "linear input");
  Vec dz;
  double loss = ce_from_logits(logits(x), mode.label, dz);
  grad.assign(inputs_, 0.0);
  for (int k = 0; k < classes_; ++k) axpy(dz[k], weights[k], grad);
  if (mode.kind == LossMode::Kind::Targeted) {
    loss = -loss;
    for (double& g : grad) g = -g;
  }
  require_finite(grad, "linear gradient");
  return loss;
}

// ---------------------------------------------------------------------------
// MlpModel

MlpModel::MlpModel(int inputs, int hidden, int classes)
    : inputs_(inputs), hidden_(hidden), classes_(classes) {
  if (inputs < 1 || hidden < 1 || classes < 2) {
    throw std::invalid_argument("mlp model: need inputs, hidden >= 1 and classes >= 2");
  }
  hidden_weights.assign(hidden, Vec(inputs, 0.0));
  hidden_biases.assign(hidden, 0.0);
  output_weights.assign(classes, Vec(hidden, 0.0));
  output_biases.assign(classes, 0.0);
}

void MlpModel::validate() const {
  for (const Vec& w : hidden_weights) require_finite(w, "mlp hidden weights");
  require_finite(hidden_biases, "mlp hidden biases");
  for (const Vec& w : output_weights) require_finite(w, "mlp output weights");
  require_finite(output_biases, "mlp output biases");
}

Vec MlpModel::logits(const Vec& x) const {
  if (static_cast<int>(x.size()) != inputs_) {
    throw std::invalid_argument("mlp model: input has wrong dimension");
  }
  Vec h(hidden_);
  for (int j = 0; j < hidden_; ++j) h[j] = std::tanh(dot(hidden_weights[j], x) + hidden_biases[j]);
  Vec z(classes_);
  for (int k = 0; k < classes_; ++k) z[k] = dot(output_weights[k], h) + output_biases[k];
  return z;
}

double MlpModel::loss_and_grad(const Vec& x, const LossMode& mode, Vec& grad) const {
  check_label(mode, classes_);
  if (static_cast<int>(x.size()) != inputs_) {
    throw std::invalid_argument("mlp model: input has wrong dimension");
  }
  require_finite(x, "mlp input");

  Vec pre(hidden_), h(hidden_);
  for (int j = 0; j < hidden_; ++j) {
    pre[j] = dot(hidden_weights[j], x) + hidden_biases[j];
    h[j] = std::tanh(pre[j]);
  }
  Vec z(classes_);
  for (int k = 0; k < classes_; ++k) z[k] = dot(output_weights[k], h) + output_biases[k];

  Vec dz;
  double loss = ce_from_logits(z, mode.label, dz);

  // dL/dh then through tanh' = 1 - h^2 back to x
  Vec dh(hidden_, 0.0);
  for (int k = 0; k < classes_; ++k) axpy(dz[k], output_weights[k], dh);
  grad.assign(inputs_, 0.0);
  for (int j = 0; j < hidden_; ++j) {
    const double dpre = dh[j] * (1.0 - h[j] * h[j]);
    axpy(dpre, hidden_weights[j], grad);
  }

  if (mode.kind == LossMode::Kind::Targeted) {
    loss = -loss;
    for (double& g : grad) g = -g;
  }
  require_finite(grad, "mlp gradient");
  return loss;
}

// ---------------------------------------------------------------------------
// EnsembleModel

EnsembleModel::EnsembleModel(std::vector<std::shared_ptr<const Model>> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("ensemble: no members");
  for (const auto& m : members_) {
    if (m->input_dim() != members_[0]->input_dim() ||
        m->num_classes() != members_[0]->num_classes()) {
      throw std::invalid_argument("ensemble: members must share input dim and classes");
    }
  }
}

int EnsembleModel::input_dim() const { return members_[0]->input_dim(); }
int EnsembleModel::num_classes() const { return members_[0]->num_classes(); }

Vec EnsembleModel::logits(const Vec& x) const {
  Vec fused(num_classes(), 0.0);
  for (const auto& m : members_) {
    const Vec lp = log_softmax(m->logits(x));
    for (int k = 0; k < num_classes(); ++k) fused[k] += lp[k];
  }
  for (double& v : fused) v /= static_cast<double>(members_.size());
  return fused;
}

double EnsembleModel::loss_and_grad(const Vec& x, const LossMode& mode, Vec& grad) const {
  const double inv = 1.0 / static_cast<double>(members_.size());
  grad.assign(input_dim(), 0.0);
  double loss = 0.0;
  Vec g;
  for (const auto& m : members_) {
    loss += m->loss_and_grad(x, mode, g) * inv;
    axpy(inv, g, grad);
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Benchmark landscapes

namespace {

class QuadraticLandscape : public Objective {
 public:
  explicit QuadraticLandscape(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  double value_and_grad(const Vec& x, Vec& grad) const override {
    require_finite(x, "quadratic input");
    grad = x;
    return 0.5 * dot(x, x);
  }

 private:
  int dim_;
};

// Separable bowls with a sinusoidal ripple: many local basins, smooth gradient.
class MultiBasinLandscape : public Objective {
 public:
  explicit MultiBasinLandscape(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  double value_and_grad(const Vec& x, Vec& grad) const override {
    require_finite(x, "multibasin input");
    grad.assign(dim_, 0.0);
    double v = 0.0;
    for (int i = 0; i < dim_; ++i) {
      v += 0.5 * x[i] * x[i] + 0.3 * std::sin(4.0 * x[i]);
      grad[i] = x[i] + 1.2 * std::cos(4.0 * x[i]);
    }
    return v;
  }

 private:
  int dim_;
};

// Constant-gradient plane with mixed-sign, index-dependent coefficients.
class LinearLandscape : public Objective {
 public:
  explicit LinearLandscape(int dim) : coeff_(dim) {
    for (int i = 0; i < dim; ++i) {
      const double mag = 1.0 + 0.1 * static_cast<double>(i % 7);
      coeff_[i] = (i % 2 == 0 ? mag : -mag);
    }
  }
  int dim() const override { return static_cast<int>(coeff_.size()); }
  double value_and_grad(const Vec& x, Vec& grad) const override {
    require_finite(x, "linear landscape input");
    grad = coeff_;
    return dot(coeff_, x);
  }

 private:
  Vec coeff_;
};

}  // namespace

std::unique_ptr<Objective> make_landscape(const std::string& name, int dim) {
  if (name == "quadratic") return std::make_unique<QuadraticLandscape>(dim);
  if (name == "multibasin") return std::make_unique<MultiBasinLandscape>(dim);
  if (name == "linear") return std::make_unique<LinearLandscape>(dim);
  throw std::invalid_argument("unknown landscape: " + name);
}

double benchmark_landscape(const std::string& name, const Vec& x, Vec& grad) {
  return make_landscape(name, static_cast<int>(x.size()))->value_and_grad(x, grad);
}

}  // namespace lff
