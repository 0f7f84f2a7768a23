#include "lff/engine.hpp"

#include <algorithm>
#include <cmath>

namespace lff {

void LffConfig::validate() const {
  if (future_steps < 1) throw std::invalid_argument("lff: future_steps must be >= 1");
  if (!(future_penalty > 0.0)) throw std::invalid_argument("lff: future_penalty must be > 0");
  if (order < 1) throw std::invalid_argument("lff: order must be >= 1");
  if (order > kMaxOrder) {
    throw std::invalid_argument("lff: order above " + std::to_string(kMaxOrder) +
                                " rejected (oracle cost grows as Q^order)");
  }
  if (outer_decay && static_cast<int>(outer_decay->size()) != order) {
    throw std::invalid_argument("lff: outer_decay must list one factor per order");
  }
}

namespace {

std::vector<double> penalty_coeffs(double beta, int q_count) {
  std::vector<double> c(q_count);
  double p = 1.0;
  for (int q = 0; q < q_count; ++q) {
    p *= beta;
    c[q] = p;
  }
  return c;
}

// Everything one refinement pass needs, threaded through the recursion.
struct EngineCtx {
  const InnerConfig* inner;
  const Objective* obj;  // counting wrapper
  const Vec* x_clean;
  const Budget* budget;
  const LffConfig* cfg;
  AttackTrace* trace = nullptr;  // filled at the top order only
  std::uint64_t* counter = nullptr;
};

// Gradients observed along one sequence, one entry per executed step.
struct SequenceRecord {
  std::vector<Vec> entry_grads;       // L1-normalized plain gradient at the step's entry point
  std::vector<double> entry_losses;   // loss at the entry point
  std::vector<double> dir_norms;      // L1 norm of the raw direction consumed by the step
  Vec final_x;
};

// order 0: the inner attacker's own rollout. order >= 1: each step launches a
// fresh order-(order-1) rollout of length future_steps from the current point,
// combines its entry gradients with the penalty weights, optionally applies
// this order's momentum, then takes the signed step. The entry gradient of a
// sequence is its first sub-record's entry gradient, so no point is evaluated
// twice.
SequenceRecord run_sequence(const EngineCtx& ctx, int order, const Vec& x_start, int n_steps,
                            std::uint64_t seed) {
  SequenceRecord rec;
  Vec x = x_start;

  if (order == 0) {
    InnerAttacker attacker(*ctx.inner, seed);
    for (int s = 0; s < n_steps; ++s) {
      StepProposal p = attacker.propose(*ctx.obj, x);
      rec.entry_grads.push_back(l1_normalize(p.point_gradient));
      rec.entry_losses.push_back(p.loss);
      rec.dir_norms.push_back(lp_norm(p.raw_direction, Norm::L1));
      const Vec delta = scale(sign(p.raw_direction), ctx.budget->alpha);
      x = project(add(x, delta), *ctx.x_clean, *ctx.budget);
    }
    rec.final_x = x;
    return rec;
  }

  const bool top = (ctx.trace != nullptr && order == ctx.cfg->order);
  const bool with_momentum = ctx.cfg->outer_decay.has_value();
  const double eta = with_momentum ? (*ctx.cfg->outer_decay)[order - 1] : 0.0;
  Vec momentum;

  FutureGradients fg;
  fg.coeffs = penalty_coeffs(ctx.cfg->future_penalty, ctx.cfg->future_steps);

  for (int s = 0; s < n_steps; ++s) {
    SequenceRecord sub =
        run_sequence(ctx, order - 1, x, ctx.cfg->future_steps, mix_seed(seed, s + 1));
    fg.grads = std::move(sub.entry_grads);
    fg.momentum_norms = std::move(sub.dir_norms);

    rec.entry_grads.push_back(fg.grads[0]);
    rec.entry_losses.push_back(sub.entry_losses[0]);

    Vec combined = lff_combine(fg);
    Vec direction;
    if (with_momentum) {
      if (momentum.empty()) momentum.assign(combined.size(), 0.0);
      const Vec ghat = l1_normalize(combined);
      for (std::size_t i = 0; i < momentum.size(); ++i) {
        momentum[i] = eta * momentum[i] + ghat[i];
      }
      direction = momentum;
    } else {
      direction = combined;
    }
    rec.dir_norms.push_back(lp_norm(direction, Norm::L1));

    const Vec delta = scale(sign(direction), ctx.budget->alpha);
    x = project(add(x, delta), *ctx.x_clean, *ctx.budget);

    if (top) {
      TraceStep ts;
      ts.raw_direction = std::move(combined);
      if (with_momentum) ts.outer_momentum = momentum;
      ts.delta = delta;
      ts.point = x;
      ts.loss = sub.entry_losses[0];
      ts.oracle_calls = *ctx.counter;
      ctx.trace->steps.push_back(std::move(ts));
    }
  }
  rec.final_x = x;
  return rec;
}

}  // namespace

FutureGradients collect_future(const InnerConfig& inner, std::uint64_t rollout_seed,
                               const Objective& obj, const Vec& x_base, const Vec& x_clean,
                               const Budget& budget, int future_steps, double future_penalty) {
  if (future_steps < 1) throw std::invalid_argument("collect_future: future_steps must be >= 1");
  budget.validate();

  std::uint64_t calls = 0;
  CountingObjective counted(obj, &calls);
  LffConfig cfg;
  cfg.future_steps = future_steps;
  cfg.future_penalty = future_penalty;
  EngineCtx ctx{&inner, &counted, &x_clean, &budget, &cfg, nullptr, &calls};

  SequenceRecord rec = run_sequence(ctx, 0, x_base, future_steps, rollout_seed);
  FutureGradients fg;
  fg.grads = std::move(rec.entry_grads);
  fg.coeffs = penalty_coeffs(future_penalty, future_steps);
  fg.momentum_norms = std::move(rec.dir_norms);
  return fg;
}

Vec lff_combine(const FutureGradients& fg) {
  if (fg.grads.empty() || fg.grads.size() != fg.coeffs.size()) {
    throw std::invalid_argument("lff_combine: coefficient/gradient size mismatch");
  }
  Vec g(fg.grads[0].size(), 0.0);
  for (std::size_t q = 0; q < fg.grads.size(); ++q) axpy(fg.coeffs[q], fg.grads[q], g);
  bool all_zero = true;
  for (double v : g) {
    if (v != 0.0) {
      all_zero = false;
      break;
    }
  }
  if (all_zero) throw ZeroDirectionError("lff_combine: weighted gradient sum is zero everywhere");
  return g;
}

Vec lff_step(const FutureGradients& fg, double alpha) {
  return scale(sign(lff_combine(fg)), alpha);
}

std::vector<double> momentum_expansion_coeffs(double mu, double beta, int future_steps,
                                              const std::vector<double>& momentum_norms) {
  if (future_steps < 1) throw std::invalid_argument("expansion: future_steps must be >= 1");
  if (static_cast<int>(momentum_norms.size()) != future_steps) {
    throw std::invalid_argument("expansion: momentum_norms must have length future_steps");
  }
  for (double n : momentum_norms) {
    if (!(n > 0.0)) throw ZeroGradientError("expansion: momentum norm must be > 0");
  }

  std::vector<double> beta_pow(future_steps + 1, 1.0);
  for (int l = 1; l <= future_steps; ++l) beta_pow[l] = beta_pow[l - 1] * beta;

  std::vector<double> coeffs(future_steps, 0.0);
  for (int i = 0; i < future_steps; ++i) {
    double mu_pow = 1.0;
    double acc = 0.0;
    for (int l = i; l < future_steps; ++l) {
      acc += beta_pow[l + 1] * mu_pow / momentum_norms[l];
      mu_pow *= mu;
    }
    coeffs[i] = acc;
  }
  return coeffs;
}

double coefficient_ratio(double mu, double beta, int future_steps,
                         const std::vector<double>& momentum_norms) {
  const std::vector<double> c =
      momentum_expansion_coeffs(mu, beta, future_steps, momentum_norms);
  return c.front() / c.back();
}

AttackTrace lffn_outer_loop(const InnerConfig& inner, std::uint64_t seed, const Objective& obj,
                            const Vec& x_clean, const Budget& budget, const LffConfig& cfg,
                            int iterations) {
  cfg.validate();
  budget.validate();
  if (iterations < 1) throw std::invalid_argument("lffn_outer_loop: iterations must be >= 1");

  AttackTrace trace;
  CountingObjective counted(obj, &trace.oracle_calls);
  EngineCtx ctx{&inner, &counted, &x_clean, &budget, &cfg, &trace, &trace.oracle_calls};
  SequenceRecord rec = run_sequence(ctx, cfg.order, x_clean, iterations, seed);
  trace.adversarial = std::move(rec.final_x);
  return trace;
}

AttackTrace lff_outer_loop(const InnerConfig& inner, std::uint64_t seed, const Objective& obj,
                           const Vec& x_clean, const Budget& budget, const LffConfig& cfg,
                           int iterations) {
  if (cfg.order != 1) throw std::invalid_argument("lff_outer_loop: order must be 1");
  return lffn_outer_loop(inner, seed, obj, x_clean, budget, cfg, iterations);
}

}  // namespace lff
