#include "lff/model_io.hpp"

#include <fstream>
#include <sstream>

namespace lff {

namespace {

constexpr int kModelFormatVersion = 1;
constexpr int kDatasetFormatVersion = 1;

void write_vec(std::ostream& os, const char* name, const Vec& v) {
  os << name;
  for (double x : v) os << " " << format_double(x);
  os << "\n";
}

void write_matrix(std::ostream& os, const char* name, const std::vector<Vec>& rows) {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    os << name << " " << r;
    for (double x : rows[r]) os << " " << format_double(x);
    os << "\n";
  }
}

std::istringstream line_stream(std::istream& is, const std::string& expect_key) {
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key != expect_key) throw IoError("expected '" + expect_key + "', found '" + key + "'");
    return ls;
  }
  throw IoError("unexpected end of file, expected '" + expect_key + "'");
}

void read_vec(std::istream& is, const std::string& key, Vec& out, std::size_t n) {
  std::istringstream ls = line_stream(is, key);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(ls >> out[i])) throw IoError("short row for '" + key + "'");
  }
}

void read_matrix(std::istream& is, const std::string& key, std::vector<Vec>& rows,
                 std::size_t nrows, std::size_t ncols) {
  rows.assign(nrows, Vec(ncols));
  for (std::size_t r = 0; r < nrows; ++r) {
    std::istringstream ls = line_stream(is, key);
    std::size_t idx = 0;
    if (!(ls >> idx) || idx != r) throw IoError("row index mismatch for '" + key + "'");
    for (std::size_t c = 0; c < ncols; ++c) {
      if (!(ls >> rows[r][c])) throw IoError("short row for '" + key + "'");
    }
  }
}

template <typename T>
T read_scalar(std::istream& is, const std::string& key) {
  std::istringstream ls = line_stream(is, key);
  T v{};
  if (!(ls >> v)) throw IoError("bad value for '" + key + "'");
  return v;
}

}  // namespace

void save_model(std::ostream& os, const Model& model, const std::string& header_comment) {
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "model_format " << kModelFormatVersion << "\n";
  os << "kind " << model.kind() << "\n";
  os << "inputs " << model.input_dim() << "\n";
  os << "classes " << model.num_classes() << "\n";
  if (const auto* lin = dynamic_cast<const LinearSoftmaxModel*>(&model)) {
    write_matrix(os, "weight", lin->weights);
    write_vec(os, "bias", lin->biases);
    return;
  }
  if (const auto* mlp = dynamic_cast<const MlpModel*>(&model)) {
    os << "hidden " << mlp->hidden_dim() << "\n";
    write_matrix(os, "hidden_weight", mlp->hidden_weights);
    write_vec(os, "hidden_bias", mlp->hidden_biases);
    write_matrix(os, "output_weight", mlp->output_weights);
    write_vec(os, "output_bias", mlp->output_biases);
    return;
  }
  if (const auto* ens = dynamic_cast<const EnsembleModel*>(&model)) {
    os << "members " << ens->members().size() << "\n";
    for (const auto& m : ens->members()) save_model(os, *m);
    return;
  }
  throw IoError("save_model: unknown model kind '" + model.kind() + "'");
}

std::shared_ptr<Model> load_model(std::istream& is) {
  const int version = read_scalar<int>(is, "model_format");
  if (version != kModelFormatVersion) {
    throw IoError("unsupported model_format " + std::to_string(version));
  }
  const auto kind = read_scalar<std::string>(is, "kind");
  const int inputs = read_scalar<int>(is, "inputs");
  const int classes = read_scalar<int>(is, "classes");

  if (kind == "linear") {
    auto m = std::make_shared<LinearSoftmaxModel>(inputs, classes);
    read_matrix(is, "weight", m->weights, classes, inputs);
    read_vec(is, "bias", m->biases, classes);
    m->validate();
    return m;
  }
  if (kind == "mlp") {
    const int hidden = read_scalar<int>(is, "hidden");
    auto m = std::make_shared<MlpModel>(inputs, hidden, classes);
    read_matrix(is, "hidden_weight", m->hidden_weights, hidden, inputs);
    read_vec(is, "hidden_bias", m->hidden_biases, hidden);
    read_matrix(is, "output_weight", m->output_weights, classes, hidden);
    read_vec(is, "output_bias", m->output_biases, classes);
    m->validate();
    return m;
  }
  if (kind == "ensemble") {
    const int n = read_scalar<int>(is, "members");
    if (n < 1) throw IoError("ensemble with no members");
    std::vector<std::shared_ptr<const Model>> members;
    for (int i = 0; i < n; ++i) members.push_back(load_model(is));
    return std::make_shared<EnsembleModel>(std::move(members));
  }
  throw IoError("unknown model kind '" + kind + "'");
}

void save_model_file(const std::string& path, const Model& model,
                     const std::string& header_comment) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for write: " + path);
  save_model(f, model, header_comment);
  if (!f) throw IoError("write failed: " + path);
}

std::shared_ptr<Model> load_model_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path);
  return load_model(f);
}

void save_dataset(std::ostream& os, const Dataset& ds, const std::string& header_comment) {
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "dataset_format " << kDatasetFormatVersion << "\n";
  os << "dim " << ds.spec.dim << "\n";
  os << "classes " << ds.spec.classes << "\n";
  os << "train_per_class " << ds.spec.train_per_class << "\n";
  os << "test_per_class " << ds.spec.test_per_class << "\n";
  os << "spread " << format_double(ds.spec.spread) << "\n";
  os << "box_lo " << format_double(ds.spec.box_lo) << "\n";
  os << "box_hi " << format_double(ds.spec.box_hi) << "\n";
  os << "seed " << ds.seed << "\n";
  write_matrix(os, "center", ds.centers);
  for (const Example& e : ds.train) {
    os << "train " << e.label;
    for (double x : e.x) os << " " << format_double(x);
    os << "\n";
  }
  for (const Example& e : ds.test) {
    os << "test " << e.label;
    for (double x : e.x) os << " " << format_double(x);
    os << "\n";
  }
}

Dataset load_dataset(std::istream& is) {
  const int version = read_scalar<int>(is, "dataset_format");
  if (version != kDatasetFormatVersion) {
    throw IoError("unsupported dataset_format " + std::to_string(version));
  }
  Dataset ds;
  ds.spec.dim = read_scalar<int>(is, "dim");
  ds.spec.classes = read_scalar<int>(is, "classes");
  ds.spec.train_per_class = read_scalar<int>(is, "train_per_class");
  ds.spec.test_per_class = read_scalar<int>(is, "test_per_class");
  ds.spec.spread = read_scalar<double>(is, "spread");
  ds.spec.box_lo = read_scalar<double>(is, "box_lo");
  ds.spec.box_hi = read_scalar<double>(is, "box_hi");
  ds.seed = read_scalar<std::uint64_t>(is, "seed");
  ds.spec.validate();

  read_matrix(is, "center", ds.centers, ds.spec.classes, ds.spec.dim);

  const auto read_examples = [&](const std::string& tag, int count, std::vector<Example>& out) {
    for (int i = 0; i < count; ++i) {
      std::istringstream ls = line_stream(is, tag);
      Example e;
      if (!(ls >> e.label)) throw IoError("bad label in " + tag + " row");
      if (e.label < 0 || e.label >= ds.spec.classes) throw IoError("label out of range");
      e.x.resize(ds.spec.dim);
      for (int d = 0; d < ds.spec.dim; ++d) {
        if (!(ls >> e.x[d])) throw IoError("short " + tag + " row");
      }
      out.push_back(std::move(e));
    }
  };
  read_examples("train", ds.spec.classes * ds.spec.train_per_class, ds.train);
  read_examples("test", ds.spec.classes * ds.spec.test_per_class, ds.test);
  return ds;
}

void save_dataset_file(const std::string& path, const Dataset& ds,
                       const std::string& header_comment) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for write: " + path);
  save_dataset(f, ds, header_comment);
  if (!f) throw IoError("write failed: " + path);
}

Dataset load_dataset_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path);
  return load_dataset(f);
}

}  // namespace lff
