#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lff/numeric.hpp"

namespace lff {

// Attack objective mode. Untargeted attacks ascend the cross-entropy loss of
// the true label; targeted attacks descend the loss toward the target label.
// Both are exposed as an ascent objective so attack loops stay mode-agnostic.
struct LossMode {
  enum class Kind { Untargeted, Targeted };
  Kind kind = Kind::Untargeted;
  int label = 0;

  static LossMode untargeted(int y_true) { return {Kind::Untargeted, y_true}; }
  static LossMode targeted(int y_target) { return {Kind::Targeted, y_target}; }
};

// A differentiable scalar field that attackers ascend.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual int dim() const = 0;
  virtual double value_and_grad(const Vec& x, Vec& grad) const = 0;

  double value(const Vec& x) const {
    Vec g;
    return value_and_grad(x, g);
  }
};

// Differentiable classifier with analytic input gradients.
// Evaluation is const and safe to call from concurrent workers.
class Model {
 public:
  virtual ~Model() = default;

  virtual int input_dim() const = 0;
  virtual int num_classes() const = 0;

  // Raw class scores; for ensembles these are fused member log-probabilities.
  virtual Vec logits(const Vec& x) const = 0;

  // Cross-entropy attack objective and its exact gradient w.r.t. x.
  // Untargeted: CE(x, y_true). Targeted: -CE(x, y_target), gradient negated,
  // so every attacker uniformly ascends.
  virtual double loss_and_grad(const Vec& x, const LossMode& mode, Vec& grad) const = 0;

  // argmax of logits; ties break to the lowest class index.
  int predict(const Vec& x) const;

  virtual std::string kind() const = 0;
};

Vec softmax(const Vec& logits);
Vec log_softmax(const Vec& logits);

class LinearSoftmaxModel : public Model {
 public:
  LinearSoftmaxModel(int inputs, int classes);

  int input_dim() const override { return inputs_; }
  int num_classes() const override { return classes_; }
  Vec logits(const Vec& x) const override;
  double loss_and_grad(const Vec& x, const LossMode& mode, Vec& grad) const override;
  std::string kind() const override { return "linear"; }

  void validate() const;

  std::vector<Vec> weights;  // classes x inputs
  Vec biases;                // classes

 private:
  int inputs_;
  int classes_;
};

// One tanh hidden layer; smooth everywhere so finite-difference checks are clean.
class MlpModel : public Model {
 public:
  MlpModel(int inputs, int hidden, int classes);

  int input_dim() const override { return inputs_; }
  int num_classes() const override { return classes_; }
  int hidden_dim() const { return hidden_; }
  Vec logits(const Vec& x) const override;
  double loss_and_grad(const Vec& x, const LossMode& mode, Vec& grad) const override;
  std::string kind() const override { return "mlp"; }

  void validate() const;

  std::vector<Vec> hidden_weights;  // hidden x inputs
  Vec hidden_biases;                // hidden
  std::vector<Vec> output_weights;  // classes x hidden
  Vec output_biases;                // classes

 private:
  int inputs_;
  int hidden_;
  int classes_;
};

// Loss-averaging fusion: loss is the arithmetic mean of member losses and the
// gradient the mean of member gradients. logits() returns mean log-probs so
// predict() is consistent with the fused loss.
class EnsembleModel : public Model {
 public:
  explicit EnsembleModel(std::vector<std::shared_ptr<const Model>> members);

  int input_dim() const override;
  int num_classes() const override;
  Vec logits(const Vec& x) const override;
  double loss_and_grad(const Vec& x, const LossMode& mode, Vec& grad) const override;
  std::string kind() const override { return "ensemble"; }

  const std::vector<std::shared_ptr<const Model>>& members() const { return members_; }

 private:
  std::vector<std::shared_ptr<const Model>> members_;
};

// Adapter turning (model, mode) into an ascent objective.
class ClassifierObjective : public Objective {
 public:
  ClassifierObjective(const Model& model, LossMode mode) : model_(model), mode_(mode) {}

  int dim() const override { return model_.input_dim(); }
  double value_and_grad(const Vec& x, Vec& grad) const override {
    return model_.loss_and_grad(x, mode_, grad);
  }

 private:
  const Model& model_;
  LossMode mode_;
};

// Counts oracle evaluations; one instance per attacked example.
class CountingObjective : public Objective {
 public:
  CountingObjective(const Objective& base, std::uint64_t* counter)
      : base_(base), counter_(counter) {}

  int dim() const override { return base_.dim(); }
  double value_and_grad(const Vec& x, Vec& grad) const override {
    ++*counter_;
    return base_.value_and_grad(x, grad);
  }

 private:
  const Objective& base_;
  std::uint64_t* counter_;
};

// Named synthetic landscapes for attacker smoke tests independent of any
// classifier: "quadratic" (convex), "multibasin" (nonconvex), "linear"
// (constant gradient). Throws std::invalid_argument on unknown names.
std::unique_ptr<Objective> make_landscape(const std::string& name, int dim);
double benchmark_landscape(const std::string& name, const Vec& x, Vec& grad);

}  // namespace lff
