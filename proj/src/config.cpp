#include "lff/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace lff {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long n = 0;
  try {
    n = std::stoll(v, &pos);
  } catch (...) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
  if (pos != v.size()) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
  return n;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  const long long n = parse_int(key, v);
  if (n < 0) throw ConfigError("config: key '" + key + "' must be non-negative");
  return static_cast<std::uint64_t>(n);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (...) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
  if (pos != v.size()) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
  return d;
}

struct RawAttack {
  AttackConfig cfg;
  bool has_lff = false;
  bool has_eps = false, has_alpha = false, has_iters = false;
  LffConfig lff;
  std::vector<double> eta;
  bool has_eta = false;
};

}  // namespace

const ModelConfig& ExperimentConfig::model_config(const std::string& name) const {
  for (const ModelConfig& m : models) {
    if (m.name == name) return m;
  }
  throw ConfigError("config: unknown model '" + name + "'");
}

const AttackConfig* ExperimentConfig::find_attack(const std::string& name) const {
  for (const AttackConfig& a : attacks) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

std::string ExperimentConfig::surrogate_id() const {
  std::string id;
  for (std::size_t i = 0; i < surrogate.size(); ++i) {
    if (i) id += "+";
    id += surrogate[i];
  }
  return id;
}

void ExperimentConfig::validate() const {
  dataset.validate();
  budget.validate();
  if (iterations < 0) throw ConfigError("config: budget.iterations must be >= 0");
  if (models.empty()) throw ConfigError("config: no models defined");
  if (surrogate.empty()) throw ConfigError("config: no surrogate named");
  if (victims.empty()) throw ConfigError("config: no victims named");
  for (const std::string& n : surrogate) model_config(n);
  for (const std::string& n : victims) model_config(n);
  if (attacks.empty()) throw ConfigError("config: no attacks defined");
  std::set<std::string> names;
  for (const AttackConfig& a : attacks) {
    if (!names.insert(a.name).second) throw ConfigError("config: duplicate attack '" + a.name + "'");
    a.budget.validate();
    if (a.iterations < 0) throw ConfigError("config: attack iterations must be >= 0");
    a.inner.validate();
    if (a.lff) a.lff->validate();
  }
  for (const AttackConfig& a : attacks) {
    if (!a.baseline.empty() && find_attack(a.baseline) == nullptr) {
      throw ConfigError("config: attack '" + a.name + "' names missing baseline '" + a.baseline + "'");
    }
  }
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::vector<std::string> model_order, attack_order;

  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError("config: duplicate key '" + key + "'");
    }
    const auto parts = split(key, '.');
    if (parts[0] == "model" && parts.size() == 3 &&
        std::find(model_order.begin(), model_order.end(), parts[1]) == model_order.end()) {
      model_order.push_back(parts[1]);
    }
    if (parts[0] == "attack" && parts.size() == 3 &&
        std::find(attack_order.begin(), attack_order.end(), parts[1]) == attack_order.end()) {
      attack_order.push_back(parts[1]);
    }
  }

  ExperimentConfig cfg;
  std::map<std::string, RawAttack> raw_attacks;
  std::set<std::string> consumed;

  const auto take = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    consumed.insert(key);
    return &it->second;
  };

  if (const auto* v = take("seed")) cfg.seed = parse_u64("seed", *v);
  if (const auto* v = take("out_dir")) cfg.out_dir = *v;
  if (const auto* v = take("mode")) {
    if (*v == "untargeted") cfg.mode = LossMode::Kind::Untargeted;
    else if (*v == "targeted") cfg.mode = LossMode::Kind::Targeted;
    else throw ConfigError("config: mode must be 'untargeted' or 'targeted'");
  }

  if (const auto* v = take("data.seed")) cfg.dataset_seed = parse_u64("data.seed", *v);
  if (const auto* v = take("data.dim")) cfg.dataset.dim = static_cast<int>(parse_int("data.dim", *v));
  if (const auto* v = take("data.classes")) cfg.dataset.classes = static_cast<int>(parse_int("data.classes", *v));
  if (const auto* v = take("data.train_per_class")) cfg.dataset.train_per_class = static_cast<int>(parse_int("data.train_per_class", *v));
  if (const auto* v = take("data.test_per_class")) cfg.dataset.test_per_class = static_cast<int>(parse_int("data.test_per_class", *v));
  if (const auto* v = take("data.spread")) cfg.dataset.spread = parse_double("data.spread", *v);
  if (const auto* v = take("data.box_lo")) cfg.dataset.box_lo = parse_double("data.box_lo", *v);
  if (const auto* v = take("data.box_hi")) cfg.dataset.box_hi = parse_double("data.box_hi", *v);

  if (const auto* v = take("budget.epsilon")) cfg.budget.epsilon = parse_double("budget.epsilon", *v);
  if (const auto* v = take("budget.alpha")) cfg.budget.alpha = parse_double("budget.alpha", *v);
  if (const auto* v = take("budget.iterations")) cfg.iterations = static_cast<int>(parse_int("budget.iterations", *v));
  cfg.budget.box_lo = cfg.dataset.box_lo;
  cfg.budget.box_hi = cfg.dataset.box_hi;

  for (const std::string& name : model_order) {
    if (!valid_name(name)) throw ConfigError("config: bad model name '" + name + "'");
    ModelConfig mc;
    mc.name = name;
    const std::string p = "model." + name + ".";
    const auto* kind = take(p + "kind");
    if (!kind) throw ConfigError("config: model '" + name + "' needs a kind");
    if (*kind == "linear") mc.spec.kind = ModelSpec::Kind::Linear;
    else if (*kind == "mlp") mc.spec.kind = ModelSpec::Kind::Mlp;
    else throw ConfigError("config: model kind must be 'linear' or 'mlp'");
    if (const auto* v = take(p + "hidden")) mc.spec.hidden = static_cast<int>(parse_int(p + "hidden", *v));
    if (const auto* v = take(p + "seed")) mc.seed = parse_u64(p + "seed", *v);
    if (const auto* v = take(p + "epochs")) mc.train.epochs = static_cast<int>(parse_int(p + "epochs", *v));
    if (const auto* v = take(p + "lr")) mc.train.learning_rate = parse_double(p + "lr", *v);
    if (const auto* v = take(p + "batch")) mc.train.batch_size = static_cast<int>(parse_int(p + "batch", *v));
    cfg.models.push_back(std::move(mc));
  }

  if (const auto* v = take("surrogate")) cfg.surrogate = split(*v, ',');
  if (const auto* v = take("victims")) cfg.victims = split(*v, ',');

  for (const std::string& name : attack_order) {
    if (!valid_name(name)) throw ConfigError("config: bad attack name '" + name + "'");
    RawAttack ra;
    ra.cfg.name = name;
    ra.cfg.budget = cfg.budget;
    ra.cfg.iterations = cfg.iterations;
    const std::string p = "attack." + name + ".";
    const auto* inner = take(p + "inner");
    if (!inner) throw ConfigError("config: attack '" + name + "' needs an inner attacker");
    ra.cfg.inner.kind = inner_kind_from_name(*inner);
    if (const auto* v = take(p + "mu")) ra.cfg.inner.momentum_decay = parse_double(p + "mu", *v);
    if (const auto* v = take(p + "emi_samples")) ra.cfg.inner.emi_samples = static_cast<int>(parse_int(p + "emi_samples", *v));
    if (const auto* v = take(p + "emi_radius")) ra.cfg.inner.emi_radius = parse_double(p + "emi_radius", *v);
    if (const auto* v = take(p + "admix_scales")) ra.cfg.inner.admix_scales = static_cast<int>(parse_int(p + "admix_scales", *v));
    if (const auto* v = take(p + "admix_mixes")) ra.cfg.inner.admix_mixes = static_cast<int>(parse_int(p + "admix_mixes", *v));
    if (const auto* v = take(p + "admix_ratio")) ra.cfg.inner.admix_ratio = parse_double(p + "admix_ratio", *v);
    if (const auto* v = take(p + "lff_q")) { ra.lff.future_steps = static_cast<int>(parse_int(p + "lff_q", *v)); ra.has_lff = true; }
    if (const auto* v = take(p + "lff_beta")) { ra.lff.future_penalty = parse_double(p + "lff_beta", *v); ra.has_lff = true; }
    if (const auto* v = take(p + "lff_order")) { ra.lff.order = static_cast<int>(parse_int(p + "lff_order", *v)); ra.has_lff = true; }
    if (const auto* v = take(p + "eta")) {
      for (const std::string& e : split(*v, ',')) ra.eta.push_back(parse_double(p + "eta", e));
      ra.has_eta = true;
      ra.has_lff = true;
    }
    if (const auto* v = take(p + "baseline")) ra.cfg.baseline = *v;
    if (const auto* v = take(p + "epsilon")) ra.cfg.budget.epsilon = parse_double(p + "epsilon", *v);
    if (const auto* v = take(p + "alpha")) ra.cfg.budget.alpha = parse_double(p + "alpha", *v);
    if (const auto* v = take(p + "iterations")) ra.cfg.iterations = static_cast<int>(parse_int(p + "iterations", *v));
    if (ra.has_lff) {
      if (ra.has_eta) {
        if (static_cast<int>(ra.eta.size()) == 1 && ra.lff.order > 1) {
          ra.lff.outer_decay = std::vector<double>(ra.lff.order, ra.eta[0]);
        } else {
          ra.lff.outer_decay = ra.eta;
        }
      }
      ra.cfg.lff = ra.lff;
    }
    raw_attacks.emplace(name, std::move(ra));
  }
  for (const std::string& name : attack_order) cfg.attacks.push_back(raw_attacks.at(name).cfg);

  for (const auto& [key, value] : kv) {
    (void)value;
    if (!consumed.count(key)) throw ConfigError("config: unknown key '" + key + "'");
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "seed = " << cfg.seed << "\n";
  os << "out_dir = " << cfg.out_dir << "\n";
  os << "mode = " << (cfg.mode == LossMode::Kind::Targeted ? "targeted" : "untargeted") << "\n";
  os << "data.seed = " << cfg.dataset_seed << "\n";
  os << "data.dim = " << cfg.dataset.dim << "\n";
  os << "data.classes = " << cfg.dataset.classes << "\n";
  os << "data.train_per_class = " << cfg.dataset.train_per_class << "\n";
  os << "data.test_per_class = " << cfg.dataset.test_per_class << "\n";
  os << "data.spread = " << format_double(cfg.dataset.spread) << "\n";
  os << "data.box_lo = " << format_double(cfg.dataset.box_lo) << "\n";
  os << "data.box_hi = " << format_double(cfg.dataset.box_hi) << "\n";
  os << "budget.epsilon = " << format_double(cfg.budget.epsilon) << "\n";
  os << "budget.alpha = " << format_double(cfg.budget.alpha) << "\n";
  os << "budget.iterations = " << cfg.iterations << "\n";
  for (const ModelConfig& m : cfg.models) {
    const std::string p = "model." + m.name + ".";
    os << p << "kind = " << (m.spec.kind == ModelSpec::Kind::Linear ? "linear" : "mlp") << "\n";
    if (m.spec.kind == ModelSpec::Kind::Mlp) os << p << "hidden = " << m.spec.hidden << "\n";
    os << p << "seed = " << m.seed << "\n";
    os << p << "epochs = " << m.train.epochs << "\n";
    os << p << "lr = " << format_double(m.train.learning_rate) << "\n";
    os << p << "batch = " << m.train.batch_size << "\n";
  }
  const auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += v[i];
    }
    return s;
  };
  os << "surrogate = " << join(cfg.surrogate) << "\n";
  os << "victims = " << join(cfg.victims) << "\n";
  for (const AttackConfig& a : cfg.attacks) {
    const std::string p = "attack." + a.name + ".";
    os << p << "inner = " << inner_kind_name(a.inner.kind) << "\n";
    os << p << "mu = " << format_double(a.inner.momentum_decay) << "\n";
    if (a.inner.kind == InnerKind::Emi) {
      os << p << "emi_samples = " << a.inner.emi_samples << "\n";
      os << p << "emi_radius = " << format_double(a.inner.emi_radius) << "\n";
    }
    if (a.inner.kind == InnerKind::Admix) {
      os << p << "admix_scales = " << a.inner.admix_scales << "\n";
      os << p << "admix_mixes = " << a.inner.admix_mixes << "\n";
      os << p << "admix_ratio = " << format_double(a.inner.admix_ratio) << "\n";
    }
    if (a.lff) {
      os << p << "lff_q = " << a.lff->future_steps << "\n";
      os << p << "lff_beta = " << format_double(a.lff->future_penalty) << "\n";
      os << p << "lff_order = " << a.lff->order << "\n";
      if (a.lff->outer_decay) {
        os << p << "eta = ";
        for (std::size_t i = 0; i < a.lff->outer_decay->size(); ++i) {
          if (i) os << ",";
          os << format_double((*a.lff->outer_decay)[i]);
        }
        os << "\n";
      }
    }
    if (!a.baseline.empty()) os << p << "baseline = " << a.baseline << "\n";
    os << p << "epsilon = " << format_double(a.budget.epsilon) << "\n";
    os << p << "alpha = " << format_double(a.budget.alpha) << "\n";
    os << p << "iterations = " << a.iterations << "\n";
  }
  return os.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string canon = canonical_config(cfg);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash_bytes(canon.data(), canon.size())));
  return buf;
}

std::string default_config_text() {
  return R"(# Frozen default transfer experiment (regression baseline).
seed = 42
out_dir = out
mode = untargeted

data.seed = 9
data.dim = 20
data.classes = 5
data.train_per_class = 200
data.test_per_class = 100
data.spread = 0.06
data.box_lo = 0
data.box_hi = 1

budget.epsilon = 0.15
budget.alpha = 0.015
budget.iterations = 16

model.srg.kind = mlp
model.srg.hidden = 32
model.srg.seed = 11
model.srg.epochs = 150
model.srg.lr = 0.15

model.vic_mlp.kind = mlp
model.vic_mlp.hidden = 32
model.vic_mlp.seed = 12
model.vic_mlp.epochs = 150
model.vic_mlp.lr = 0.15

model.vic_wide.kind = mlp
model.vic_wide.hidden = 48
model.vic_wide.seed = 13
model.vic_wide.epochs = 150
model.vic_wide.lr = 0.15

model.vic_lin.kind = linear
model.vic_lin.seed = 14
model.vic_lin.epochs = 150
model.vic_lin.lr = 0.15

surrogate = srg
victims = vic_mlp,vic_wide,vic_lin

attack.ifgsm.inner = ifgsm

attack.mi.inner = mifgsm
attack.mi.mu = 1

attack.emi.inner = emi
attack.emi.mu = 1
attack.emi.emi_samples = 11
attack.emi.emi_radius = 0.027450980392156862

attack.admix.inner = admix
attack.admix.mu = 1
attack.admix.admix_scales = 5
attack.admix.admix_mixes = 3
attack.admix.admix_ratio = 0.2

attack.lff_i.inner = ifgsm
attack.lff_i.lff_q = 4
attack.lff_i.lff_beta = 1
attack.lff_i.baseline = ifgsm

attack.mlff_mi.inner = mifgsm
attack.mlff_mi.mu = 1
attack.mlff_mi.lff_q = 4
attack.mlff_mi.lff_beta = 1
attack.mlff_mi.eta = 1
attack.mlff_mi.baseline = mi

attack.mlff_emi.inner = emi
attack.mlff_emi.mu = 1
attack.mlff_emi.emi_samples = 11
attack.mlff_emi.emi_radius = 0.027450980392156862
attack.mlff_emi.lff_q = 4
attack.mlff_emi.lff_beta = 1
attack.mlff_emi.eta = 1
attack.mlff_emi.baseline = emi

attack.mlff_admix.inner = admix
attack.mlff_admix.mu = 1
attack.mlff_admix.admix_scales = 5
attack.mlff_admix.admix_mixes = 3
attack.mlff_admix.admix_ratio = 0.2
attack.mlff_admix.lff_q = 4
attack.mlff_admix.lff_beta = 1
attack.mlff_admix.eta = 1
attack.mlff_admix.baseline = admix

attack.lff2_mi.inner = mifgsm
attack.lff2_mi.mu = 1
attack.lff2_mi.lff_q = 2
attack.lff2_mi.lff_order = 2
attack.lff2_mi.baseline = mi
)";
}

ExperimentConfig default_experiment() { return parse_config(default_config_text()); }

}  // namespace lff
