#include "lff/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lff/rng.hpp"

namespace lff {

namespace {

void init_vec(Rng& rng, Vec& v, double r) {
  for (double& x : v) x = rng.uniform(-r, r);
}

std::shared_ptr<Model> init_model(const ModelSpec& spec, int dim, int classes, Rng& rng) {
  if (spec.kind == ModelSpec::Kind::Linear) {
    auto m = std::make_shared<LinearSoftmaxModel>(dim, classes);
    const double r = 1.0 / std::sqrt(static_cast<double>(dim));
    for (Vec& w : m->weights) init_vec(rng, w, r);
    init_vec(rng, m->biases, r);
    return m;
  }
  auto m = std::make_shared<MlpModel>(dim, spec.hidden, classes);
  const double rh = 1.0 / std::sqrt(static_cast<double>(dim));
  const double ro = 1.0 / std::sqrt(static_cast<double>(spec.hidden));
  for (Vec& w : m->hidden_weights) init_vec(rng, w, rh);
  init_vec(rng, m->hidden_biases, rh);
  for (Vec& w : m->output_weights) init_vec(rng, w, ro);
  init_vec(rng, m->output_biases, ro);
  return m;
}

// One SGD step on a batch; returns the mean batch loss.
double sgd_batch_linear(LinearSoftmaxModel& m, const std::vector<Example>& data,
                        const std::vector<int>& idx, std::size_t lo, std::size_t hi, double lr) {
  const int K = m.num_classes();
  const double inv = 1.0 / static_cast<double>(hi - lo);
  std::vector<Vec> gw(K, Vec(m.input_dim(), 0.0));
  Vec gb(K, 0.0);
  double loss = 0.0;
  for (std::size_t t = lo; t < hi; ++t) {
    const Example& e = data[idx[t]];
    const Vec p = softmax(m.logits(e.x));
    loss += -std::log(std::max(p[e.label], 1e-300)) * inv;
    for (int k = 0; k < K; ++k) {
      const double dz = (p[k] - (k == e.label ? 1.0 : 0.0)) * inv;
      axpy(dz, e.x, gw[k]);
      gb[k] += dz;
    }
  }
  for (int k = 0; k < K; ++k) {
    axpy(-lr, gw[k], m.weights[k]);
    m.biases[k] -= lr * gb[k];
  }
  return loss;
}

double sgd_batch_mlp(MlpModel& m, const std::vector<Example>& data,
                     const std::vector<int>& idx, std::size_t lo, std::size_t hi, double lr) {
  const int K = m.num_classes();
  const int H = m.hidden_dim();
  const double inv = 1.0 / static_cast<double>(hi - lo);
  std::vector<Vec> gwh(H, Vec(m.input_dim(), 0.0));
  Vec gbh(H, 0.0);
  std::vector<Vec> gwo(K, Vec(H, 0.0));
  Vec gbo(K, 0.0);
  double loss = 0.0;

  Vec h(H), dz, dh(H);
  for (std::size_t t = lo; t < hi; ++t) {
    const Example& e = data[idx[t]];
    for (int j = 0; j < H; ++j) h[j] = std::tanh(dot(m.hidden_weights[j], e.x) + m.hidden_biases[j]);
    Vec z(K);
    for (int k = 0; k < K; ++k) z[k] = dot(m.output_weights[k], h) + m.output_biases[k];
    const Vec p = softmax(z);
    loss += -std::log(std::max(p[e.label], 1e-300)) * inv;

    dz.assign(K, 0.0);
    for (int k = 0; k < K; ++k) dz[k] = (p[k] - (k == e.label ? 1.0 : 0.0)) * inv;
    std::fill(dh.begin(), dh.end(), 0.0);
    for (int k = 0; k < K; ++k) {
      axpy(dz[k], h, gwo[k]);
      gbo[k] += dz[k];
      axpy(dz[k], m.output_weights[k], dh);
    }
    for (int j = 0; j < H; ++j) {
      const double dpre = dh[j] * (1.0 - h[j] * h[j]);
      axpy(dpre, e.x, gwh[j]);
      gbh[j] += dpre;
    }
  }
  for (int j = 0; j < H; ++j) {
    axpy(-lr, gwh[j], m.hidden_weights[j]);
    m.hidden_biases[j] -= lr * gbh[j];
  }
  for (int k = 0; k < K; ++k) {
    axpy(-lr, gwo[k], m.output_weights[k]);
    m.output_biases[k] -= lr * gbo[k];
  }
  return loss;
}

}  // namespace

TrainResult train(const std::vector<Example>& data, int dim, int classes,
                  const ModelSpec& spec, std::uint64_t seed, const TrainOptions& opts) {
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  for (const Example& e : data) {
    if (e.label < 0 || e.label >= classes) throw std::invalid_argument("train: label out of range");
  }

  Rng rng(mix_seed(seed, 0x747261696e313233ULL));
  auto model = init_model(spec, dim, classes, rng);

  std::vector<int> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);

  const int batch = std::max(1, opts.batch_size);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    // Fisher-Yates with our own rng so shuffles are reproducible everywhere.
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i)))]);
    }
    double epoch_loss = 0.0;
    for (std::size_t lo = 0; lo < idx.size(); lo += batch) {
      const std::size_t hi = std::min(idx.size(), lo + batch);
      double l;
      if (spec.kind == ModelSpec::Kind::Linear) {
        l = sgd_batch_linear(static_cast<LinearSoftmaxModel&>(*model), data, idx, lo, hi,
                             opts.learning_rate);
      } else {
        l = sgd_batch_mlp(static_cast<MlpModel&>(*model), data, idx, lo, hi, opts.learning_rate);
      }
      epoch_loss += l;
      if (!std::isfinite(l)) throw TrainingDivergedError(epoch);
    }
    (void)epoch_loss;
  }

  TrainResult out;
  out.train_accuracy = accuracy(*model, data);
  out.model = std::move(model);
  return out;
}

}  // namespace lff
