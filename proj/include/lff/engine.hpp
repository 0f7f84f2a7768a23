#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lff/attacker.hpp"
#include "lff/numeric.hpp"
#include "lff/oracle.hpp"

namespace lff {

// Meta-iteration settings. Each outer step rolls the inner attacker
// future_steps ahead from the current point, combines the L1-normalized
// gradients collected along that rollout with geometric penalty weights, and
// steps in the sign of the combination. outer_decay present makes it the
// momentum variant (one decay factor per order); order > 1 recurses, using
// the order-(n-1) refined sequence as the future.
struct LffConfig {
  int future_steps = 4;          // Q
  double future_penalty = 1.0;   // beta
  int order = 1;
  std::optional<std::vector<double>> outer_decay;  // eta per order

  static constexpr int kMaxOrder = 4;  // Q^order oracle calls per outer step

  void validate() const;
};

// Gradients collected along one future rollout. grads[q] is the plain loss
// gradient at the q-th rollout point, L1-normalized; coeffs[q] = beta^(q+1);
// momentum_norms[q] is the L1 norm of the attacker's raw step direction there
// (the momentum norm, for momentum-based attackers).
struct FutureGradients {
  std::vector<Vec> grads;
  std::vector<double> coeffs;
  std::vector<double> momentum_norms;
};

// Fresh Q-step rollout of the inner attacker from x_base (momentum and
// lookahead re-initialized; rng reseeded from rollout_seed). Does not touch
// any caller-side attacker state.
FutureGradients collect_future(const InnerConfig& inner, std::uint64_t rollout_seed,
                               const Objective& obj, const Vec& x_base, const Vec& x_clean,
                               const Budget& budget, int future_steps, double future_penalty);

// Coefficient-weighted sum of the collected gradients (pre-sign). Throws
// ZeroDirectionError when the sum is zero in every coordinate.
Vec lff_combine(const FutureGradients& fg);

// alpha * sign(lff_combine(fg)).
Vec lff_step(const FutureGradients& fg, double alpha);

// Closed-form weights of each rollout gradient inside a momentum rollout
// direction sum_q beta^q * M_q / ||M_q||: coefficient i equals
// sum_{l=i}^{Q-1} beta^(l+1) * mu^(l-i) / momentum_norms[l].
// Used as the oracle that validates the direct rollout expansion.
std::vector<double> momentum_expansion_coeffs(double mu, double beta, int future_steps,
                                              const std::vector<double>& momentum_norms);

// First over last closed-form coefficient; measures how strongly the raw
// momentum weighting drifts toward the earliest gradient.
double coefficient_ratio(double mu, double beta, int future_steps,
                         const std::vector<double>& momentum_norms);

// Order-1 outer loop (requires cfg.order == 1).
AttackTrace lff_outer_loop(const InnerConfig& inner, std::uint64_t seed, const Objective& obj,
                           const Vec& x_clean, const Budget& budget, const LffConfig& cfg,
                           int iterations);

// General multi-order loop; order = 1 takes the identical code path as
// lff_outer_loop. Oracle usage grows as iterations * future_steps^order times
// the inner attacker's per-step cost and is reported in the trace.
AttackTrace lffn_outer_loop(const InnerConfig& inner, std::uint64_t seed, const Objective& obj,
                            const Vec& x_clean, const Budget& budget, const LffConfig& cfg,
                            int iterations);

}  // namespace lff
