#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "lff/numeric.hpp"
#include "lff/oracle.hpp"
#include "lff/rng.hpp"

namespace lff {

enum class InnerKind { IFgsm, MiFgsm, Emi, Admix };

const char* inner_kind_name(InnerKind k);
InnerKind inner_kind_from_name(const std::string& name);

struct InnerConfig {
  InnerKind kind = InnerKind::MiFgsm;
  double momentum_decay = 1.0;  // mu; unused for ifgsm

  // EMI: gradients averaged over sample points spaced along the previous
  // averaged gradient direction, offsets linspace(-radius, radius, samples).
  int emi_samples = 11;
  double emi_radius = 7.0 / 255.0;

  // Admix: gradients averaged over down-scaled copies (factor 1/2^i) of the
  // input mixed with pool examples at the given ratio.
  int admix_scales = 5;
  int admix_mixes = 3;
  double admix_ratio = 0.2;
  const std::vector<Vec>* admix_pool = nullptr;
  int admix_exclude = -1;  // pool index of the example under attack, if any

  void validate() const;
};

struct StepProposal {
  Vec raw_direction;   // g_t: what the sign step consumes (momentum for MI-family)
  Vec point_gradient;  // plain loss gradient at the queried point
  double loss = 0.0;   // loss at the queried point (mean sample loss for EMI/Admix)
};

// Stateful step proposer. Value semantics: copies carry independent state, so
// distinct examples can run on distinct workers.
class InnerAttacker {
 public:
  InnerAttacker(const InnerConfig& cfg, std::uint64_t seed);

  // Computes the next raw direction at x and advances internal state.
  StepProposal propose(const Objective& obj, const Vec& x);

  // Same config, momentum and lookahead reset, rng reseeded.
  InnerAttacker fresh_clone(std::uint64_t seed) const;

  // Exact oracle evaluations per propose() call for this configuration.
  int oracle_calls_per_step() const;

  const InnerConfig& config() const { return cfg_; }
  const Vec& momentum() const { return momentum_; }

 private:
  StepProposal propose_ifgsm(const Objective& obj, const Vec& x);
  StepProposal propose_mifgsm(const Objective& obj, const Vec& x);
  StepProposal propose_emi(const Objective& obj, const Vec& x);
  StepProposal propose_admix(const Objective& obj, const Vec& x);
  void push_momentum(const Vec& normalized_grad);

  InnerConfig cfg_;
  Vec momentum_;        // zero until first use; stays zero for ifgsm
  Vec prev_mean_grad_;  // EMI lookahead; zero at the first step
  Rng rng_;
};

struct TraceStep {
  Vec raw_direction;   // g_t, or the combined future direction for the outer loops
  Vec outer_momentum;  // empty unless an outer momentum applies
  Vec delta;           // alpha * sign(raw direction or momentum), pre-projection
  Vec point;           // accumulated point after projection
  double loss = 0.0;
  std::uint64_t oracle_calls = 0;  // cumulative at the end of this step
};

struct AttackTrace {
  std::vector<TraceStep> steps;
  Vec adversarial;                 // final accumulated point
  std::uint64_t oracle_calls = 0;
};

// Plain iterative attack: step = alpha * sign(raw direction), projected into
// the budget ball and data box after every step.
AttackTrace rollout(const InnerConfig& cfg, std::uint64_t seed, const Objective& obj,
                    const Vec& x_start, const Vec& x_clean, const Budget& budget, int steps);

// One line per outer step: index, delta hash, norms, loss, cumulative calls.
void write_trace(std::ostream& os, const AttackTrace& trace, int example_index);

}  // namespace lff
