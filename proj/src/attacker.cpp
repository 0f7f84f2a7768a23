#include "lff/attacker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace lff {

const char* inner_kind_name(InnerKind k) {
  switch (k) {
    case InnerKind::IFgsm: return "ifgsm";
    case InnerKind::MiFgsm: return "mifgsm";
    case InnerKind::Emi: return "emi";
    case InnerKind::Admix: return "admix";
  }
  return "?";
}

InnerKind inner_kind_from_name(const std::string& name) {
  if (name == "ifgsm") return InnerKind::IFgsm;
  if (name == "mifgsm") return InnerKind::MiFgsm;
  if (name == "emi") return InnerKind::Emi;
  if (name == "admix") return InnerKind::Admix;
  throw std::invalid_argument("unknown inner attacker: " + name);
}

void InnerConfig::validate() const {
  if (!(momentum_decay >= 0.0)) throw std::invalid_argument("inner: mu must be >= 0");
  if (kind == InnerKind::Emi) {
    if (emi_samples < 1) throw std::invalid_argument("inner: emi samples must be >= 1");
    if (!(emi_radius >= 0.0)) throw std::invalid_argument("inner: emi radius must be >= 0");
  }
  if (kind == InnerKind::Admix) {
    if (admix_scales < 1) throw std::invalid_argument("inner: admix scales must be >= 1");
    if (admix_mixes < 0) throw std::invalid_argument("inner: admix mixes must be >= 0");
    if (!(admix_ratio >= 0.0 && admix_ratio < 1.0)) {
      throw std::invalid_argument("inner: admix ratio must be in [0, 1)");
    }
  }
}

InnerAttacker::InnerAttacker(const InnerConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(seed) {
  cfg_.validate();
}

InnerAttacker InnerAttacker::fresh_clone(std::uint64_t seed) const {
  return InnerAttacker(cfg_, seed);
}

int InnerAttacker::oracle_calls_per_step() const {
  switch (cfg_.kind) {
    case InnerKind::IFgsm:
    case InnerKind::MiFgsm:
      return 1;
    case InnerKind::Emi: {
      // Odd sample counts place one offset exactly at 0, where the plain
      // point gradient is already evaluated.
      const bool has_zero_offset = (cfg_.emi_samples % 2 == 1);
      return cfg_.emi_samples + (has_zero_offset ? 0 : 1);
    }
    case InnerKind::Admix: {
      const int base = cfg_.admix_scales * std::max(1, cfg_.admix_mixes);
      const bool reuses_x = (cfg_.admix_mixes == 0 || cfg_.admix_ratio == 0.0);
      return base + (reuses_x ? 0 : 1);
    }
  }
  return 1;
}

void InnerAttacker::push_momentum(const Vec& normalized_grad) {
  if (momentum_.empty()) momentum_.assign(normalized_grad.size(), 0.0);
  for (std::size_t i = 0; i < momentum_.size(); ++i) {
    momentum_[i] = cfg_.momentum_decay * momentum_[i] + normalized_grad[i];
  }
}

StepProposal InnerAttacker::propose(const Objective& obj, const Vec& x) {
  require_finite(x, "propose");
  switch (cfg_.kind) {
    case InnerKind::IFgsm: return propose_ifgsm(obj, x);
    case InnerKind::MiFgsm: return propose_mifgsm(obj, x);
    case InnerKind::Emi: return propose_emi(obj, x);
    case InnerKind::Admix: return propose_admix(obj, x);
  }
  throw std::logic_error("unreachable inner kind");
}

StepProposal InnerAttacker::propose_ifgsm(const Objective& obj, const Vec& x) {
  StepProposal p;
  p.loss = obj.value_and_grad(x, p.point_gradient);
  if (lp_norm(p.point_gradient, Norm::L1) == 0.0) {
    throw ZeroGradientError("ifgsm: zero gradient at current point");
  }
  p.raw_direction = p.point_gradient;
  return p;
}

StepProposal InnerAttacker::propose_mifgsm(const Objective& obj, const Vec& x) {
  StepProposal p;
  p.loss = obj.value_and_grad(x, p.point_gradient);
  push_momentum(l1_normalize(p.point_gradient));
  p.raw_direction = momentum_;
  return p;
}

StepProposal InnerAttacker::propose_emi(const Objective& obj, const Vec& x) {
  const int n = cfg_.emi_samples;
  std::vector<double> offsets(n, 0.0);
  if (n > 1) {
    // (2i - (n-1)) / (n-1) hits an exact 0 at the midpoint of odd grids
    for (int i = 0; i < n; ++i) {
      offsets[i] = cfg_.emi_radius * (2.0 * i - (n - 1)) / static_cast<double>(n - 1);
    }
  }

  if (prev_mean_grad_.empty()) prev_mean_grad_.assign(x.size(), 0.0);

  StepProposal p;
  Vec sum(x.size(), 0.0);
  Vec g;
  bool have_point_grad = false;
  for (int i = 0; i < n; ++i) {
    Vec xi = x;
    axpy(offsets[i], prev_mean_grad_, xi);
    const double li = obj.value_and_grad(xi, g);
    axpy(1.0, g, sum);
    if (offsets[i] == 0.0 && !have_point_grad) {
      p.point_gradient = g;
      p.loss = li;
      have_point_grad = true;
    }
  }
  if (!have_point_grad) {
    p.loss = obj.value_and_grad(x, p.point_gradient);
  }

  Vec mean = scale(sum, 1.0 / static_cast<double>(n));
  Vec mean_hat;
  try {
    mean_hat = l1_normalize(mean);
  } catch (const ZeroGradientError&) {
    throw ZeroGradientError("emi: zero averaged gradient over all sample points");
  }
  prev_mean_grad_ = mean_hat;
  push_momentum(mean_hat);
  p.raw_direction = momentum_;
  return p;
}

StepProposal InnerAttacker::propose_admix(const Objective& obj, const Vec& x) {
  const int mixes = cfg_.admix_mixes;
  const int scales = cfg_.admix_scales;

  // Mixture partners for this step: distinct pool indices, never the example
  // under attack. Drawn once and reused across all scale copies.
  std::vector<const Vec*> partners;
  if (mixes > 0) {
    if (cfg_.admix_pool == nullptr) {
      throw std::invalid_argument("admix: no mixing pool supplied");
    }
    const auto& pool = *cfg_.admix_pool;
    std::vector<int> candidates;
    candidates.reserve(pool.size());
    for (int i = 0; i < static_cast<int>(pool.size()); ++i) {
      if (i != cfg_.admix_exclude) candidates.push_back(i);
    }
    if (static_cast<int>(candidates.size()) < mixes) {
      throw std::invalid_argument("admix: pool too small for requested mixes");
    }
    for (int j = 0; j < mixes; ++j) {
      const int pick = rng_.uniform_int(static_cast<int>(candidates.size()));
      partners.push_back(&pool[candidates[pick]]);
      candidates.erase(candidates.begin() + pick);
    }
  }

  StepProposal p;
  Vec sum(x.size(), 0.0);
  Vec g;
  int count = 0;
  bool have_point_grad = false;
  double scale_factor = 1.0;
  for (int i = 0; i < scales; ++i, scale_factor *= 0.5) {
    const int inner_count = std::max(1, mixes);
    for (int j = 0; j < inner_count; ++j) {
      Vec input = x;
      if (mixes > 0) axpy(cfg_.admix_ratio, *partners[j], input);
      for (double& v : input) v *= scale_factor;
      const double li = obj.value_and_grad(input, g);
      axpy(1.0, g, sum);
      ++count;
      if (!have_point_grad && scale_factor == 1.0 && (mixes == 0 || cfg_.admix_ratio == 0.0)) {
        p.point_gradient = g;
        p.loss = li;
        have_point_grad = true;
      }
    }
  }
  if (!have_point_grad) {
    p.loss = obj.value_and_grad(x, p.point_gradient);
  }

  Vec mean = scale(sum, 1.0 / static_cast<double>(count));
  Vec mean_hat;
  try {
    mean_hat = l1_normalize(mean);
  } catch (const ZeroGradientError&) {
    throw ZeroGradientError("admix: zero averaged gradient over all mixed inputs");
  }
  push_momentum(mean_hat);
  p.raw_direction = momentum_;
  return p;
}

AttackTrace rollout(const InnerConfig& cfg, std::uint64_t seed, const Objective& obj,
                    const Vec& x_start, const Vec& x_clean, const Budget& budget, int steps) {
  if (steps < 1) throw std::invalid_argument("rollout: steps must be >= 1");
  budget.validate();

  AttackTrace trace;
  CountingObjective counted(obj, &trace.oracle_calls);
  InnerAttacker attacker(cfg, seed);
  Vec x = x_start;
  for (int s = 0; s < steps; ++s) {
    StepProposal p = attacker.propose(counted, x);
    TraceStep ts;
    ts.raw_direction = p.raw_direction;
    ts.delta = scale(sign(p.raw_direction), budget.alpha);
    x = project(add(x, ts.delta), x_clean, budget);
    ts.point = x;
    ts.loss = p.loss;
    ts.oracle_calls = trace.oracle_calls;
    trace.steps.push_back(std::move(ts));
  }
  trace.adversarial = x;
  return trace;
}

void write_trace(std::ostream& os, const AttackTrace& trace, int example_index) {
  char buf[256];
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const TraceStep& s = trace.steps[t];
    std::snprintf(buf, sizeof(buf),
                  "ex=%d t=%zu delta_hash=%016llx l1=%.12g l2=%.12g linf=%.12g loss=%.12g calls=%llu",
                  example_index, t + 1,
                  static_cast<unsigned long long>(hash_vec(s.delta)),
                  lp_norm(s.delta, Norm::L1), lp_norm(s.delta, Norm::L2),
                  lp_norm(s.delta, Norm::LInf), s.loss,
                  static_cast<unsigned long long>(s.oracle_calls));
    os << buf << "\n";
  }
}

}  // namespace lff
