#include "lff/verify.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <vector>

#include "lff/config.hpp"
#include "lff/engine.hpp"
#include "lff/harness.hpp"
#include "lff/model_io.hpp"
#include "lff/rng.hpp"

namespace lff {

namespace {

double fd_max_rel_err(const Objective& obj, const Vec& x, double h) {
  Vec analytic;
  obj.value_and_grad(x, analytic);
  double worst = 0.0;
  Vec xp = x, xm = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const double fd = (obj.value(xp) - obj.value(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
    const double denom = std::max({1.0, std::fabs(analytic[i]), std::fabs(fd)});
    worst = std::max(worst, std::fabs(analytic[i] - fd) / denom);
  }
  return worst;
}

ExperimentConfig tiny_config() {
  return parse_config(R"(
seed = 5
mode = untargeted
data.seed = 3
data.dim = 8
data.classes = 3
data.train_per_class = 40
data.test_per_class = 15
data.spread = 0.05
budget.epsilon = 0.12
budget.alpha = 0.012
budget.iterations = 8
model.s.kind = mlp
model.s.hidden = 12
model.s.seed = 1
model.s.epochs = 80
model.s.lr = 0.2
model.v.kind = linear
model.v.seed = 2
model.v.epochs = 80
model.v.lr = 0.2
surrogate = s
victims = v
attack.mi.inner = mifgsm
attack.mi.mu = 1
attack.wrapped.inner = mifgsm
attack.wrapped.mu = 1
attack.wrapped.lff_q = 3
attack.wrapped.lff_beta = 1
attack.wrapped.eta = 1
attack.wrapped.baseline = mi
)");
}

bool traces_delta_equal(const AttackTrace& a, const AttackTrace& b) {
  if (a.steps.size() != b.steps.size()) return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    if (a.steps[i].delta != b.steps[i].delta) return false;
    if (a.steps[i].point != b.steps[i].point) return false;
  }
  return true;
}

}  // namespace

bool run_verification_suite(std::ostream& os) {
  struct Check {
    std::string name;
    std::function<void()> fn;
  };

  const auto fail = [](const std::string& msg) { throw std::runtime_error(msg); };

  std::vector<Check> checks;

  checks.push_back({"vector-ops", [&] {
    Rng rng(99);
    for (int rep = 0; rep < 200; ++rep) {
      Vec v(10);
      for (double& x : v) x = rng.uniform(-2.0, 2.0);
      const Vec s = sign(v);
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (s[i] != (v[i] > 0 ? 1.0 : (v[i] < 0 ? -1.0 : 0.0))) fail("sign mismatch");
      }
      if (lp_norm(s, Norm::LInf) > 1.0) fail("sign linf > 1");
      const Vec n = l1_normalize(v);
      if (std::fabs(lp_norm(n, Norm::L1) - 1.0) > 1e-12) fail("l1_normalize not unit");
      Budget b{0.2, 0.02, 0.0, 1.0};
      Vec clean(10, 0.5), adv(10);
      for (double& x : adv) x = rng.uniform(-0.5, 1.5);
      const Vec p1 = project(adv, clean, b);
      if (project(p1, clean, b) != p1) fail("project not idempotent");
      for (std::size_t i = 0; i < p1.size(); ++i) {
        if (std::fabs(p1[i] - clean[i]) > b.epsilon + 1e-15) fail("project outside ball");
      }
    }
  }});

  checks.push_back({"gradient-finite-diff", [&] {
    const ExperimentConfig cfg = tiny_config();
    const Dataset ds = generate_dataset(cfg.dataset, cfg.dataset_seed);
    const ModelZoo zoo = train_models(cfg, ds);
    std::vector<std::shared_ptr<const Model>> members = {zoo.by_name.at("s"), zoo.by_name.at("v")};
    const EnsembleModel ens(members);
    Rng rng(17);
    const auto check_obj = [&](const Objective& obj, double tol, const char* what) {
      for (int rep = 0; rep < 100; ++rep) {
        Vec x(obj.dim());
        for (double& v : x) v = rng.uniform(0.0, 1.0);
        const double err = fd_max_rel_err(obj, x, 1e-5);
        if (err > tol) fail(std::string(what) + ": fd error " + format_double(err));
      }
    };
    const ClassifierObjective o1(zoo.get("s"), LossMode::untargeted(0));
    const ClassifierObjective o2(zoo.get("v"), LossMode::untargeted(1));
    const ClassifierObjective o3(ens, LossMode::targeted(2));
    check_obj(o1, 1e-5, "mlp");
    check_obj(o2, 1e-5, "linear");
    check_obj(o3, 1e-5, "ensemble");
    check_obj(*make_landscape("quadratic", 6), 1e-5, "quadratic");
    check_obj(*make_landscape("multibasin", 6), 1e-5, "multibasin");
  }});

  checks.push_back({"coefficient-oracle", [&] {
    const std::vector<double> norms = {1, 2, 3, 4, 5};
    const auto c = momentum_expansion_coeffs(1.0, 1.0, 5, norms);
    if (std::fabs(c[0] - 137.0 / 60.0) > 1e-12) fail("front coefficient");
    if (std::fabs(coefficient_ratio(1.0, 1.0, 5, norms) - 137.0 / 12.0) > 1e-12) fail("ratio");
    if (coefficient_ratio(0.7, 1.3, 1, {2.0}) != 1.0) fail("single-step ratio");
  }});

  checks.push_back({"q1-degeneracy", [&] {
    const ExperimentConfig cfg = tiny_config();
    const Dataset ds = generate_dataset(cfg.dataset, cfg.dataset_seed);
    const ModelZoo zoo = train_models(cfg, ds);
    InnerConfig inner;
    inner.kind = InnerKind::IFgsm;
    LffConfig lff;
    lff.future_steps = 1;
    for (int i = 0; i < 10; ++i) {
      const Example& e = ds.test[i];
      const ClassifierObjective obj(*zoo.surrogate, LossMode::untargeted(e.label));
      const AttackTrace a = rollout(inner, 1, obj, e.x, e.x, cfg.budget, 8);
      const AttackTrace b = lff_outer_loop(inner, 1, obj, e.x, cfg.budget, lff, 8);
      if (!traces_delta_equal(a, b)) fail("Q=1 differs from the plain attack");
    }
  }});

  checks.push_back({"constant-gradient-collapse", [&] {
    const auto land = make_landscape("linear", 10);
    const Budget b{0.3, 0.03, 0.0, 1.0};
    const Vec x0(10, 0.5);
    InnerConfig ifgsm;
    ifgsm.kind = InnerKind::IFgsm;
    const AttackTrace base = rollout(ifgsm, 1, *land, x0, x0, b, 6);
    LffConfig lff;
    lff.future_steps = 4;
    const AttackTrace t1 = lff_outer_loop(ifgsm, 1, *land, x0, b, lff, 6);
    LffConfig mlff = lff;
    mlff.outer_decay = std::vector<double>{1.0};
    const AttackTrace t2 = lffn_outer_loop(ifgsm, 1, *land, x0, b, mlff, 6);
    LffConfig second = lff;
    second.order = 2;
    second.future_steps = 2;
    const AttackTrace t3 = lffn_outer_loop(ifgsm, 1, *land, x0, b, second, 6);
    if (!traces_delta_equal(base, t1) || !traces_delta_equal(base, t2) ||
        !traces_delta_equal(base, t3)) {
      fail("refined trace differs on a constant-gradient landscape");
    }
  }});

  checks.push_back({"budget-and-box", [&] {
    const ExperimentConfig cfg = tiny_config();
    const ExperimentResult res = run_experiment(cfg, 1);
    for (const AttackRun& run : res.runs) {
      for (const AttackOutput& out : run.outputs) {
        for (std::size_t i = 0; i < out.adversarial.size(); ++i) {
          if (std::fabs(out.adversarial[i] - out.clean[i]) > run.attack.budget.epsilon + 1e-12) {
            fail("epsilon ball violated");
          }
          if (out.adversarial[i] < cfg.budget.box_lo || out.adversarial[i] > cfg.budget.box_hi) {
            fail("box violated");
          }
        }
      }
    }
  }});

  checks.push_back({"determinism", [&] {
    const ExperimentConfig cfg = tiny_config();
    std::ostringstream a, b, c;
    run_experiment(cfg, 1).report.write_csv(a);
    run_experiment(cfg, 1).report.write_csv(b);
    run_experiment(cfg, 2).report.write_csv(c);
    if (a.str() != b.str()) fail("repeat run differs");
    if (a.str() != c.str()) fail("jobs=2 run differs");
  }});

  bool all_ok = true;
  for (const Check& check : checks) {
    try {
      check.fn();
      os << "PASS " << check.name << "\n";
    } catch (const std::exception& ex) {
      os << "FAIL " << check.name << ": " << ex.what() << "\n";
      all_ok = false;
    }
  }
  return all_ok;
}

}  // namespace lff
