#include "lff/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <ostream>
#include <thread>

#include "lff/rng.hpp"

namespace lff {

namespace {

void check_budget_invariants(const Vec& adv, const Vec& clean, const Budget& b,
                             const std::string& attack_name) {
  for (std::size_t i = 0; i < adv.size(); ++i) {
    if (std::fabs(adv[i] - clean[i]) > b.epsilon + 1e-12) {
      throw InvariantViolation("attack '" + attack_name + "': epsilon ball violated at coordinate " +
                               std::to_string(i));
    }
    if (adv[i] < b.box_lo || adv[i] > b.box_hi) {
      throw InvariantViolation("attack '" + attack_name + "': data box violated at coordinate " +
                               std::to_string(i));
    }
  }
}

}  // namespace

const Model& ModelZoo::get(const std::string& name) const {
  auto it = by_name.find(name);
  if (it == by_name.end()) throw ConfigError("no trained model named '" + name + "'");
  return *it->second;
}

std::vector<int> draw_targets(const Dataset& ds, int classes, std::uint64_t seed) {
  std::vector<int> targets(ds.test.size(), 0);
  for (std::size_t i = 0; i < ds.test.size(); ++i) {
    Rng rng(mix_seed(seed, 0x7461726765740000ULL + i));
    int t = rng.uniform_int(classes - 1);
    if (t >= ds.test[i].label) ++t;  // uniform over classes != true label
    targets[i] = t;
  }
  return targets;
}

ModelZoo train_models(const ExperimentConfig& cfg, const Dataset& ds) {
  ModelZoo zoo;
  for (const ModelConfig& mc : cfg.models) {
    TrainResult r = train(ds.train, ds.spec.dim, ds.spec.classes, mc.spec, mc.seed, mc.train);
    zoo.train_accuracy[mc.name] = r.train_accuracy;
    zoo.by_name[mc.name] = std::move(r.model);
  }
  if (cfg.surrogate.size() == 1) {
    zoo.surrogate = zoo.by_name.at(cfg.surrogate[0]);
  } else {
    std::vector<std::shared_ptr<const Model>> members;
    for (const std::string& n : cfg.surrogate) members.push_back(zoo.by_name.at(n));
    zoo.surrogate = std::make_shared<EnsembleModel>(std::move(members));
  }
  return zoo;
}

AttackRun run_attack(const AttackConfig& attack, LossMode::Kind mode, const Model& surrogate,
                     const Dataset& ds, std::uint64_t experiment_seed, int jobs) {
  AttackRun run;
  run.attack = attack;
  run.mode = mode;

  if (mode == LossMode::Kind::Targeted) {
    run.targets = draw_targets(ds, ds.spec.classes, experiment_seed);
  }

  // Admix mixes against the clean test pool, never against itself.
  std::vector<Vec> pool;
  if (attack.inner.kind == InnerKind::Admix) {
    pool.reserve(ds.test.size());
    for (const Example& e : ds.test) pool.push_back(e.x);
  }

  std::vector<int> eligible;
  for (int i = 0; i < static_cast<int>(ds.test.size()); ++i) {
    const int pred = surrogate.predict(ds.test[i].x);
    const bool attackable = mode == LossMode::Kind::Untargeted
                                ? (pred == ds.test[i].label)
                                : (pred != run.targets[i]);
    if (attackable) eligible.push_back(i);
  }

  std::vector<AttackOutput> slots(eligible.size());
  const auto started = std::chrono::steady_clock::now();

  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t slot = cursor.fetch_add(1);
      if (slot >= eligible.size()) return;
      if (failed.load()) return;
      const int idx = eligible[slot];
      try {
        const Example& e = ds.test[idx];
        const LossMode lm = mode == LossMode::Kind::Untargeted
                                ? LossMode::untargeted(e.label)
                                : LossMode::targeted(run.targets[idx]);
        ClassifierObjective obj(surrogate, lm);

        AttackConfig local = attack;
        if (local.inner.kind == InnerKind::Admix) {
          local.inner.admix_pool = &pool;
          local.inner.admix_exclude = idx;
        }
        const std::uint64_t seed = mix_seed(mix_seed(experiment_seed, 0x61747461636b3131ULL),
                                            static_cast<std::uint64_t>(idx));

        AttackOutput out;
        out.example_index = idx;
        out.clean = e.x;
        if (local.iterations == 0) {
          out.adversarial = e.x;
        } else if (local.lff) {
          out.trace = lffn_outer_loop(local.inner, seed, obj, e.x, local.budget, *local.lff,
                                      local.iterations);
          out.adversarial = out.trace.adversarial;
        } else {
          out.trace = rollout(local.inner, seed, obj, e.x, e.x, local.budget, local.iterations);
          out.adversarial = out.trace.adversarial;
        }
        check_budget_invariants(out.adversarial, out.clean, local.budget, local.name);
        slots[slot] = std::move(out);
      } catch (const std::exception& ex) {
        std::lock_guard<std::mutex> g(failure_mutex);
        if (!failed.exchange(true)) failure = ex.what();
        return;
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(eligible.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (failed.load()) throw InvariantViolation("attack '" + attack.name + "' failed: " + failure);

  // Ordered reduction: slots follow eligible order, so output bytes do not
  // depend on the worker count.
  run.outputs = std::move(slots);
  for (const AttackOutput& o : run.outputs) run.oracle_calls += o.trace.oracle_calls;
  run.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                          started)
                    .count();
  return run;
}

TransferReport evaluate(const std::vector<AttackRun>& runs, const ExperimentConfig& cfg,
                        const ModelZoo& zoo, const Dataset& ds) {
  TransferReport report;
  report.config_hash = config_hash(cfg);
  const std::string surrogate_id = cfg.surrogate_id();

  // victim list: surrogate row first, then the configured victims
  std::vector<std::pair<std::string, const Model*>> victims;
  victims.emplace_back(surrogate_id, zoo.surrogate.get());
  for (const std::string& name : cfg.victims) victims.emplace_back(name, &zoo.get(name));

  for (const AttackRun& run : runs) {
    for (const auto& [victim_name, victim] : victims) {
      ReportRow row;
      row.surrogate = surrogate_id;
      row.victim = victim_name;
      row.attack = run.attack.name;
      row.clean_acc = accuracy(*victim, ds.test);
      row.oracle_calls = run.oracle_calls;
      row.wall_ms = run.wall_ms;

      int denom = 0;
      int hits = 0;
      for (const AttackOutput& out : run.outputs) {
        const Example& e = ds.test[out.example_index];
        if (victim->predict(e.x) != e.label) continue;  // clean-misclassified: excluded
        ++denom;
        const int pred_adv = victim->predict(out.adversarial);
        if (run.mode == LossMode::Kind::Untargeted) {
          if (pred_adv != e.label) ++hits;
        } else {
          if (pred_adv == run.targets[out.example_index]) ++hits;
        }
      }
      row.asr = denom > 0 ? static_cast<double>(hits) / static_cast<double>(denom) : 0.0;
      report.rows.push_back(std::move(row));
    }
  }

  // increments against the named baselines, matched per victim
  for (ReportRow& row : report.rows) {
    const AttackConfig* atk = cfg.find_attack(row.attack);
    if (atk == nullptr || atk->baseline.empty()) continue;
    const ReportRow* base = report.find(atk->baseline, row.victim);
    if (base == nullptr) {
      throw ConfigError("evaluate: baseline '" + atk->baseline + "' missing for attack '" +
                        row.attack + "'");
    }
    row.inc = row.asr - base->asr;
  }
  return report;
}

const ReportRow* TransferReport::find(const std::string& attack, const std::string& victim) const {
  for (const ReportRow& r : rows) {
    if (r.attack == attack && r.victim == victim) return &r;
  }
  return nullptr;
}

double TransferReport::mean_victim_asr(const std::string& attack,
                                       const std::string& surrogate_name) const {
  double sum = 0.0;
  int n = 0;
  for (const ReportRow& r : rows) {
    if (r.attack == attack && r.victim != surrogate_name) {
      sum += r.asr;
      ++n;
    }
  }
  return n > 0 ? sum / n : 0.0;
}

void TransferReport::write_csv(std::ostream& os) const {
  os << "# config_hash=" << config_hash << "\n";
  os << "surrogate,victim,attack,clean_acc,asr,inc,oracle_calls,wall_ms\n";
  for (const ReportRow& r : rows) {
    os << r.surrogate << "," << r.victim << "," << r.attack << "," << format_double(r.clean_acc)
       << "," << format_double(r.asr) << "," << format_double(r.inc) << "," << r.oracle_calls
       << ",0\n";
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs) {
  ExperimentResult res;
  res.dataset = generate_dataset(cfg.dataset, cfg.dataset_seed);
  res.zoo = train_models(cfg, res.dataset);
  ExperimentResult inner = run_experiment_on(cfg, res.dataset, res.zoo, jobs);
  res.runs = std::move(inner.runs);
  res.report = std::move(inner.report);
  return res;
}

ExperimentResult run_experiment_on(const ExperimentConfig& cfg, const Dataset& ds,
                                   const ModelZoo& zoo, int jobs) {
  ExperimentResult res;
  for (const AttackConfig& attack : cfg.attacks) {
    res.runs.push_back(run_attack(attack, cfg.mode, *zoo.surrogate, ds, cfg.seed, jobs));
  }
  res.report = evaluate(res.runs, cfg, zoo, ds);
  return res;
}

SweepResult sweep(const ExperimentConfig& cfg, SweepAxis axis, std::vector<double> values,
                  int jobs) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  std::sort(values.begin(), values.end());
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] == values[i - 1]) throw ConfigError("sweep: duplicate axis value");
  }
  bool any_lff = false;
  for (const AttackConfig& a : cfg.attacks) any_lff |= a.lff.has_value();
  if (!any_lff) throw ConfigError("sweep: no attack carries a refinement config to sweep");

  const Dataset ds = generate_dataset(cfg.dataset, cfg.dataset_seed);
  const ModelZoo zoo = train_models(cfg, ds);

  SweepResult sr;
  sr.axis = axis;
  for (double v : values) {
    ExperimentConfig point_cfg = cfg;
    for (AttackConfig& a : point_cfg.attacks) {
      if (!a.lff) continue;
      if (axis == SweepAxis::FutureSteps) {
        const int q = static_cast<int>(v);
        if (static_cast<double>(q) != v || q < 1) {
          throw ConfigError("sweep: Q values must be positive integers");
        }
        a.lff->future_steps = q;
      } else {
        if (!(v > 0.0)) throw ConfigError("sweep: beta values must be > 0");
        a.lff->future_penalty = v;
      }
    }
    ExperimentResult res = run_experiment_on(point_cfg, ds, zoo, jobs);
    sr.points.push_back({v, std::move(res.report)});
  }
  return sr;
}

void write_sweep_summary(std::ostream& os, const SweepResult& sr, const ExperimentConfig& cfg) {
  os << "# config_hash=" << config_hash(cfg) << "\n";
  os << "axis,value,attack,mean_victim_asr\n";
  const std::string surrogate_id = cfg.surrogate_id();
  const char* axis_name = sr.axis == SweepAxis::FutureSteps ? "Q" : "beta";
  for (const SweepPoint& p : sr.points) {
    for (const AttackConfig& a : cfg.attacks) {
      if (!a.lff) continue;
      os << axis_name << "," << format_double(p.value) << "," << a.name << ","
         << format_double(p.report.mean_victim_asr(a.name, surrogate_id)) << "\n";
    }
  }
}

}  // namespace lff
