#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lff/config.hpp"
#include "lff/harness.hpp"
#include "lff/model_io.hpp"
#include "lff/verify.hpp"

namespace fs = std::filesystem;
using namespace lff;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvariant = 2;

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  int jobs = 1;
};

ExperimentConfig load_cfg(const CommonArgs& args) {
  ExperimentConfig cfg = load_config_file(args.config_path);
  if (!args.out_override.empty()) cfg.out_dir = args.out_override;
  if (args.has_seed_override) cfg.seed = args.seed_override;
  return cfg;
}

std::string dataset_path(const ExperimentConfig& cfg) { return cfg.out_dir + "/dataset.txt"; }
std::string model_path(const ExperimentConfig& cfg, const std::string& name) {
  return cfg.out_dir + "/model_" + name + ".txt";
}

int cmd_gen_data(const CommonArgs& args) {
  const ExperimentConfig cfg = load_cfg(args);
  fs::create_directories(cfg.out_dir);
  const Dataset ds = generate_dataset(cfg.dataset, cfg.dataset_seed);
  save_dataset_file(dataset_path(cfg), ds, "config_hash=" + config_hash(cfg));
  std::cout << "wrote " << dataset_path(cfg) << " (" << ds.train.size() << " train, "
            << ds.test.size() << " test)\n";
  return kExitOk;
}

int cmd_train(const CommonArgs& args) {
  const ExperimentConfig cfg = load_cfg(args);
  const Dataset ds = load_dataset_file(dataset_path(cfg));
  for (const ModelConfig& mc : cfg.models) {
    TrainResult r;
    try {
      r = train(ds.train, ds.spec.dim, ds.spec.classes, mc.spec, mc.seed, mc.train);
    } catch (const TrainingDivergedError& ex) {
      throw std::runtime_error("model " + mc.name + ": " + ex.what());
    }
    const double acc = accuracy(*r.model, ds.train);
    save_model_file(model_path(cfg, mc.name), *r.model, "config_hash=" + config_hash(cfg));
    std::cout << "model " << mc.name << ": train_accuracy=" << format_double(acc) << " -> "
              << model_path(cfg, mc.name) << "\n";
  }
  return kExitOk;
}

ModelZoo load_zoo(const ExperimentConfig& cfg) {
  ModelZoo zoo;
  for (const ModelConfig& mc : cfg.models) {
    zoo.by_name[mc.name] = load_model_file(model_path(cfg, mc.name));
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

std::uint64_t hash_outputs(const std::vector<AttackOutput>& outs) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const AttackOutput& o : outs) {
    h = hash_combine(h, static_cast<std::uint64_t>(o.example_index));
    h = hash_combine(h, hash_vec(o.adversarial));
  }
  return h;
}

int cmd_attack(const CommonArgs& args) {
  const ExperimentConfig cfg = load_cfg(args);
  const Dataset ds = load_dataset_file(dataset_path(cfg));
  const ModelZoo zoo = load_zoo(cfg);

  ExperimentResult res;
  for (const AttackConfig& attack : cfg.attacks) {
    AttackRun run = run_attack(attack, cfg.mode, *zoo.surrogate, ds, cfg.seed, args.jobs);
    std::cout << "attack " << attack.name << ": " << run.outputs.size() << " examples, "
              << run.oracle_calls << " oracle calls, " << format_double(run.wall_ms) << " ms\n";
    res.runs.push_back(std::move(run));
  }
  res.report = evaluate(res.runs, cfg, zoo, ds);

  // Determinism spot-check: re-attack a fixed sample and compare bytes.
  for (const AttackConfig& attack : cfg.attacks) {
    AttackRun again = run_attack(attack, cfg.mode, *zoo.surrogate, ds, cfg.seed, 1);
    const AttackRun* first = nullptr;
    for (const AttackRun& r : res.runs) {
      if (r.attack.name == attack.name) first = &r;
    }
    if (hash_outputs(first->outputs) != hash_outputs(again.outputs)) {
      std::cerr << "invariant violated: determinism hash for attack '" << attack.name << "'\n";
      return kExitInvariant;
    }
  }

  fs::create_directories(cfg.out_dir);
  {
    std::ofstream f(cfg.out_dir + "/report.csv");
    res.report.write_csv(f);
  }
  for (const AttackRun& run : res.runs) {
    std::ofstream f(cfg.out_dir + "/trace_" + run.attack.name + ".log");
    f << "# config_hash=" << config_hash(cfg) << "\n";
    for (const AttackOutput& out : run.outputs) write_trace(f, out.trace, out.example_index);
  }
  std::cout << "wrote " << cfg.out_dir << "/report.csv\n";
  return kExitOk;
}

int cmd_sweep(const CommonArgs& args, const std::string& axis, std::vector<double> values) {
  const ExperimentConfig cfg = load_cfg(args);
  SweepAxis ax;
  if (axis == "Q") ax = SweepAxis::FutureSteps;
  else if (axis == "beta") ax = SweepAxis::FuturePenalty;
  else {
    std::cerr << "sweep: --axis must be Q or beta\n";
    return kExitUsage;
  }
  const SweepResult sr = sweep(cfg, ax, std::move(values), args.jobs);

  fs::create_directories(cfg.out_dir);
  for (const SweepPoint& p : sr.points) {
    std::ostringstream name;
    name << cfg.out_dir << "/sweep_" << axis << "_";
    if (ax == SweepAxis::FutureSteps) name << static_cast<int>(p.value);
    else name << p.value;
    name << ".csv";
    std::ofstream f(name.str());
    p.report.write_csv(f);
  }
  std::ofstream f(cfg.out_dir + "/sweep_summary.csv");
  write_sweep_summary(f, sr, cfg);
  std::cout << "wrote " << cfg.out_dir << "/sweep_summary.csv (" << sr.points.size()
            << " axis values)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Future-refined sign-gradient attacks: data generation, training, "
               "attack execution, ablation sweeps and self-verification"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string axis;
  std::vector<double> values;

  const auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", args.config_path, "experiment config file");
    if (needs_config) opt->required();
    sub->add_option("--out", args.out_override, "override the output directory");
    sub->add_option("--jobs", args.jobs, "worker threads (output is jobs-invariant)")
        ->check(CLI::PositiveNumber);
    sub->add_option_function<std::uint64_t>(
        "--seed-override",
        [&](std::uint64_t s) {
          args.seed_override = s;
          args.has_seed_override = true;
        },
        "override the experiment seed");
  };

  auto* gen = app.add_subcommand("gen-data", "generate the synthetic dataset");
  add_common(gen, true);
  auto* tr = app.add_subcommand("train", "train all configured models");
  add_common(tr, true);
  auto* at = app.add_subcommand("attack", "run all configured attacks and report transfer ASR");
  add_common(at, true);
  auto* sw = app.add_subcommand("sweep", "re-run the pipeline over an axis of Q or beta values");
  add_common(sw, true);
  sw->add_option("--axis", axis, "Q or beta")->required();
  sw->add_option("--values", values, "axis values")->required()->delimiter(',');
  auto* ver = app.add_subcommand("verify", "run the built-in invariant and oracle suite");
  add_common(ver, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(args);
    if (tr->parsed()) return cmd_train(args);
    if (at->parsed()) return cmd_attack(args);
    if (sw->parsed()) return cmd_sweep(args, axis, values);
    if (ver->parsed()) return run_verification_suite(std::cout) ? kExitOk : kExitInvariant;
  } catch (const InvariantViolation& ex) {
    std::cerr << "invariant violated: " << ex.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
