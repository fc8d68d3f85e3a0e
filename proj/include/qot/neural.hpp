// From-scratch dense feed-forward network: forward pass, backpropagation of
// the per-batch RMS loss, adamax updates, the staircase LR schedule, and the
// reference-mode training loop.
//
// Reference mode is the only mode: single-threaded, fixed shuffle and
// summation order, so a (dataset, config) pair always trains to the same
// bits. Trained models are immutable and safe for concurrent prediction.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qot/features.hpp"
#include "qot/linkmodel.hpp"
#include "qot/physics.hpp"
#include "qot/rng.hpp"

namespace qot {

// --- minimal row-major matrix ------------------------------------------------

struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
  double* row(int i) { return a.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const { return a.data() + static_cast<std::size_t>(i) * cols; }
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

namespace detail {

// Eight independent accumulator lanes; the compiler maps them onto one SIMD
// register without needing to reassociate a serial reduction, so results are
// identical between batched and per-sample paths.
inline double dot(const double* x, const double* y, int n) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  int i = 0;
  for (; i + 8 <= n; i += 8)
    for (int k = 0; k < 8; ++k) acc[k] += x[i + k] * y[i + k];
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i] * y[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

/// C = A * B^T + bias (bias indexed by B row). C must be pre-sized.
inline void matmul_nt_bias(const Mat& A, const Mat& B, const std::vector<double>& bias, Mat& C) {
  for (int i = 0; i < A.rows; ++i) {
    const double* ar = A.row(i);
    double* cr = C.row(i);
    for (int j = 0; j < B.rows; ++j) cr[j] = dot(ar, B.row(j), A.cols) + bias[j];
  }
}

/// C += A^T * B restricted to our use: C[j][k] += sum_i A[i][j] * B[i][k].
inline void accumulate_outer(const Mat& A, const Mat& B, Mat& C) {
  for (int i = 0; i < A.rows; ++i) {
    const double* ar = A.row(i);
    const double* br = B.row(i);
    for (int j = 0; j < A.cols; ++j) {
      double* cr = C.row(j);
      const double s = ar[j];
      for (int k = 0; k < B.cols; ++k) cr[k] += s * br[k];
    }
  }
}

/// C = A * B with A sparse-ish in columns: C[i][k] = sum_j A[i][j] * B[j][k].
inline void matmul_nn(const Mat& A, const Mat& B, Mat& C) {
  for (int i = 0; i < A.rows; ++i) {
    const double* ar = A.row(i);
    double* cr = C.row(i);
    for (int k = 0; k < B.cols; ++k) cr[k] = 0.0;
    for (int j = 0; j < A.cols; ++j) {
      const double s = ar[j];
      if (s == 0.0) continue;
      const double* br = B.row(j);
      for (int k = 0; k < B.cols; ++k) cr[k] += s * br[k];
    }
  }
}

}  // namespace detail

// --- activations --------------------------------------------------------------

enum class Activation { LeakyRelu, Selu };

inline constexpr double leaky_relu_slope = 0.01;
inline constexpr double selu_lambda = 1.0507009873554805;
inline constexpr double selu_alpha = 1.6732632423543772;

inline double activate(Activation kind, double x) {
  if (kind == Activation::LeakyRelu) return x > 0.0 ? x : leaky_relu_slope * x;
  return x > 0.0 ? selu_lambda * x : selu_lambda * selu_alpha * std::expm1(x);
}

inline double activate_derivative(Activation kind, double x) {
  if (kind == Activation::LeakyRelu) return x > 0.0 ? 1.0 : leaky_relu_slope;
  return x > 0.0 ? selu_lambda : selu_lambda * selu_alpha * std::exp(x);
}

inline const char* activation_name(Activation a) {
  return a == Activation::LeakyRelu ? "leaky_relu" : "selu";
}

inline bool parse_activation(const std::string& name, Activation& out) {
  if (name == "leaky_relu") { out = Activation::LeakyRelu; return true; }
  if (name == "selu") { out = Activation::Selu; return true; }
  return false;
}

// --- model ---------------------------------------------------------------------

/// What the network's log10/z-scored regression target is measured against.
/// Plain regresses log10(eta) directly. SciRatio regresses
/// log10(eta / eta_sci(link, B_cut)): the link-dependent scale is factored
/// out through the exactly computable SCI anchor, which shrinks the target's
/// dynamic range by an order of magnitude and with it the error tail, and
/// bounds predictions below by the physics (eta >= SCI for every plan).
enum class TargetScale { Plain, SciRatio };

inline const char* target_scale_name(TargetScale t) {
  return t == TargetScale::Plain ? "log10_zscore" : "log10_zscore_sci_ratio";
}

inline bool parse_target_scale(const std::string& name, TargetScale& out) {
  if (name == "log10_zscore") { out = TargetScale::Plain; return true; }
  if (name == "log10_zscore_sci_ratio") { out = TargetScale::SciRatio; return true; }
  return false;
}

inline double target_scale_value(TargetScale kind, const Scenario& scenario) {
  if (kind == TargetScale::Plain) return 1.0;
  for (const Channel& c : scenario.plan.channels)
    if (c.is_cut) return eta_sci(scenario.link, c.symbol_rate);
  return eta_sci(scenario.link, scenario.plan.cut().symbol_rate);
}

struct DenseLayer {
  Mat weights;                // outputs x inputs, row-major
  std::vector<double> bias;   // outputs
};

struct ModelMeta {
  std::string arch = "custom";
  std::string model_id;
  std::uint64_t seed = 0;
  int epochs_trained = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t dataset_size = 0;
};

struct MlpModel {
  std::vector<int> layer_sizes;  // input, hidden..., 1
  Activation activation = Activation::LeakyRelu;
  std::vector<DenseLayer> layers;
  NormStats norm_stats;
  TargetScale target_scale = TargetScale::Plain;
  ModelMeta meta;

  int input_size() const { return layer_sizes.front(); }
  std::size_t hidden_count() const { return layers.size() - 1; }
};

/// Cone ANN: 8 hidden layers halving from 512 down to 4, leaky ReLU.
inline std::vector<int> ann_layer_sizes() {
  return {static_cast<int>(feature_count), 512, 256, 128, 64, 32, 16, 8, 4, 1};
}

/// SNN: 16 hidden layers of 64 units, SELU.
inline std::vector<int> snn_layer_sizes() {
  std::vector<int> sizes{static_cast<int>(feature_count)};
  sizes.insert(sizes.end(), 16, 64);
  sizes.push_back(1);
  return sizes;
}

/// He-normal initialisation for leaky ReLU, LeCun-normal for SELU (the
/// self-normalizing prerequisite). Biases start at zero.
inline MlpModel make_mlp(std::vector<int> layer_sizes, Activation activation, std::uint64_t seed) {
  if (layer_sizes.size() < 2 || layer_sizes.back() != 1)
    throw std::invalid_argument("make_mlp: need [input, ..., 1] layer sizes");
  MlpModel model;
  model.layer_sizes = std::move(layer_sizes);
  model.activation = activation;
  model.meta.seed = seed;
  RngEngine eng = make_engine(seed, 0x1217);
  for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
    const int fan_in = model.layer_sizes[l];
    const int fan_out = model.layer_sizes[l + 1];
    const double scale = activation == Activation::LeakyRelu ? std::sqrt(2.0 / fan_in)
                                                             : std::sqrt(1.0 / fan_in);
    DenseLayer layer;
    layer.weights = Mat(fan_out, fan_in);
    for (double& w : layer.weights.a) w = scale * normal01(eng);
    layer.bias.assign(fan_out, 0.0);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

// --- forward -----------------------------------------------------------------

struct ForwardCache {
  std::vector<Mat> activations;  // activations[0] = input batch
  std::vector<Mat> pre;          // pre-activation per layer
};

/// Batched forward pass; hidden layers are affine-then-activation, the
/// output layer is linear. Returns a reference to the [n x 1] predictions.
inline const Mat& forward_batch(const MlpModel& model, const Mat& input, ForwardCache& cache) {
  const std::size_t n_layers = model.layers.size();
  cache.activations.resize(n_layers + 1);
  cache.pre.resize(n_layers);
  cache.activations[0] = input;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Mat& a_in = cache.activations[l];
    if (a_in.cols != model.layers[l].weights.cols)
      throw std::invalid_argument("forward: input width does not match layer");
    Mat& z = cache.pre[l];
    z = Mat(a_in.rows, model.layers[l].weights.rows);
    detail::matmul_nt_bias(a_in, model.layers[l].weights, model.layers[l].bias, z);
    if (l + 1 == n_layers) {
      cache.activations[l + 1] = z;
    } else {
      Mat& act = cache.activations[l + 1];
      act = Mat(z.rows, z.cols);
      for (std::size_t i = 0; i < z.a.size(); ++i) act.a[i] = activate(model.activation, z.a[i]);
    }
  }
  return cache.activations[n_layers];
}

/// Single-sample forward; same kernels as the batched path, bit-identical.
inline double forward(const MlpModel& model, const double* input, int n) {
  if (n != model.input_size()) throw std::invalid_argument("forward: dimension mismatch");
  std::vector<double> cur(input, input + n), next;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const DenseLayer& layer = model.layers[l];
    next.resize(layer.weights.rows);
    for (int j = 0; j < layer.weights.rows; ++j)
      next[j] = detail::dot(cur.data(), layer.weights.row(j), layer.weights.cols) + layer.bias[j];
    if (l + 1 < model.layers.size())
      for (double& v : next) v = activate(model.activation, v);
    cur.swap(next);
  }
  return cur[0];
}

inline double forward(const MlpModel& model, const FeatureVector& normalized) {
  return forward(model, normalized.data(), static_cast<int>(normalized.size()));
}

// --- loss and backward ---------------------------------------------------------

inline constexpr double rms_epsilon = 1e-12;

struct Gradients {
  std::vector<Mat> weights;
  std::vector<std::vector<double>> bias;

  void reset(const MlpModel& model) {
    weights.resize(model.layers.size());
    bias.resize(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      weights[l] = Mat(model.layers[l].weights.rows, model.layers[l].weights.cols);
      bias[l].assign(model.layers[l].bias.size(), 0.0);
    }
  }
};

/// Batch loss sqrt(mean squared error) and its gradients. The epsilon guard
/// keeps the sqrt derivative finite on an all-zero residual batch.
inline double backward_batch(const MlpModel& model, ForwardCache& cache,
                             const std::vector<double>& targets, Gradients& grads) {
  const std::size_t n_layers = model.layers.size();
  const Mat& pred = cache.activations[n_layers];
  const int n = pred.rows;
  double mse = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = pred.at(i, 0) - targets[i];
    mse += r * r;
  }
  mse /= n;
  const double loss = std::sqrt(mse);

  Mat delta(n, 1);
  const double denom = n * (loss + rms_epsilon);
  for (int i = 0; i < n; ++i) delta.at(i, 0) = (pred.at(i, 0) - targets[i]) / denom;

  grads.reset(model);
  for (std::size_t l = n_layers; l-- > 0;) {
    detail::accumulate_outer(delta, cache.activations[l], grads.weights[l]);
    for (int i = 0; i < delta.rows; ++i)
      for (int j = 0; j < delta.cols; ++j) grads.bias[l][j] += delta.at(i, j);
    if (l > 0) {
      Mat d_in(delta.rows, model.layers[l].weights.cols);
      detail::matmul_nn(delta, model.layers[l].weights, d_in);
      const Mat& z = cache.pre[l - 1];
      for (std::size_t i = 0; i < d_in.a.size(); ++i)
        d_in.a[i] *= activate_derivative(model.activation, z.a[i]);
      delta = std::move(d_in);
    }
  }
  return loss;
}

// --- adamax ---------------------------------------------------------------------

struct AdamaxConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamaxState {
  std::vector<Mat> m_weights, u_weights;
  std::vector<std::vector<double>> m_bias, u_bias;
  std::int64_t step_count = 0;

  void reset(const MlpModel& model) {
    m_weights.clear(); u_weights.clear(); m_bias.clear(); u_bias.clear();
    for (const DenseLayer& layer : model.layers) {
      m_weights.emplace_back(layer.weights.rows, layer.weights.cols);
      u_weights.emplace_back(layer.weights.rows, layer.weights.cols);
      m_bias.emplace_back(layer.bias.size(), 0.0);
      u_bias.emplace_back(layer.bias.size(), 0.0);
    }
    step_count = 0;
  }
};

namespace detail {
inline void adamax_update(double* theta, const double* grad, double* m, double* u, std::size_t n,
                          double lr_corrected, const AdamaxConfig& cfg) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
    u[i] = std::max(cfg.beta2 * u[i], std::abs(grad[i]));
    theta[i] -= lr_corrected * m[i] / (u[i] + cfg.epsilon);
  }
}
}  // namespace detail

/// One adamax step: m <- b1 m + (1-b1) g, u <- max(b2 u, |g|),
/// theta <- theta - lr/(1-b1^t) * m/(u+eps).
inline void adamax_step(MlpModel& model, const Gradients& grads, double lr, AdamaxState& state,
                        const AdamaxConfig& cfg = {}) {
  ++state.step_count;
  const double correction = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step_count));
  const double lr_corrected = lr / correction;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    detail::adamax_update(model.layers[l].weights.a.data(), grads.weights[l].a.data(),
                          state.m_weights[l].a.data(), state.u_weights[l].a.data(),
                          model.layers[l].weights.a.size(), lr_corrected, cfg);
    detail::adamax_update(model.layers[l].bias.data(), grads.bias[l].data(),
                          state.m_bias[l].data(), state.u_bias[l].data(),
                          model.layers[l].bias.size(), lr_corrected, cfg);
  }
}

// --- training ---------------------------------------------------------------------

struct TrainConfig {
  int epochs = 50;
  int batch_size = 64;
  double lr0 = 0.01;
  int lr_decade_every = 10;  // epochs per /10 step
  AdamaxConfig adamax;
  double split_train = 0.70;
  double split_val = 0.15;
  double split_test = 0.15;
  std::uint64_t seed = 1;
};

/// Staircase schedule: lr0 / 10^floor((epoch - 1) / decade). 1-based epochs.
inline double lr_at(int epoch, const TrainConfig& cfg) {
  return cfg.lr0 * std::pow(10.0, -((epoch - 1) / cfg.lr_decade_every));
}

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

/// Deterministic shuffled 70/15/15 partition. Fraction-times-n is rounded to
/// the nearest integer (0.70 * 20000 is 13999.99... in binary), so sizes are
/// exact for any n divisible by 20.
inline SplitIndices split_indices(std::size_t n, const TrainConfig& cfg) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  RngEngine eng = make_engine(cfg.seed, 0x5717);
  shuffle(eng, idx);
  const auto sized = [n](double fraction) {
    return std::min(n, static_cast<std::size_t>(std::llround(fraction * n)));
  };
  const std::size_t n_train = sized(cfg.split_train);
  const std::size_t n_val = std::min(n - n_train, sized(cfg.split_val));
  SplitIndices out;
  out.train.assign(idx.begin(), idx.begin() + n_train);
  out.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
  out.test.assign(idx.begin() + n_train + n_val, idx.end());
  return out;
}

struct EpochLog {
  int epoch;
  double lr;
  double train_loss;
  double val_loss;
};

namespace detail {

inline double eval_rms(const MlpModel& model, const std::vector<FeatureVector>& features,
                       const std::vector<double>& targets, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0.0;
  double sq = 0.0;
  for (std::size_t i : idx) {
    const double r = forward(model, features[i]) - targets[i];
    sq += r * r;
  }
  return std::sqrt(sq / idx.size());
}

}  // namespace detail

/// Trains on pre-extracted raw features and eta labels. Fits the normalizer
/// on the training split only, then runs the full recipe: adamax on the
/// per-batch RMS loss, staircase LR, fixed per-epoch shuffle.
inline MlpModel train_on_features(const std::vector<FeatureVector>& raw_features,
                                  const std::vector<double>& etas, std::vector<int> layer_sizes,
                                  Activation activation, const TrainConfig& cfg,
                                  std::vector<EpochLog>* log = nullptr,
                                  const SplitIndices* fixed_split = nullptr) {
  const std::size_t n = raw_features.size();
  if (n != etas.size() || n < 2) throw std::invalid_argument("train: bad dataset");
  const SplitIndices split = fixed_split ? *fixed_split : split_indices(n, cfg);

  std::vector<FeatureVector> train_raw;
  std::vector<double> train_eta;
  train_raw.reserve(split.train.size());
  train_eta.reserve(split.train.size());
  for (std::size_t i : split.train) {
    train_raw.push_back(raw_features[i]);
    train_eta.push_back(etas[i]);
  }
  const NormStats stats = fit_normalizer(train_raw, train_eta);

  std::vector<FeatureVector> features(n);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    features[i] = normalize(raw_features[i], stats);
    targets[i] = normalize_target(etas[i], stats);
  }

  MlpModel model = make_mlp(std::move(layer_sizes), activation, cfg.seed);
  model.norm_stats = stats;
  model.meta.split_seed = cfg.seed;
  model.meta.dataset_size = n;

  AdamaxState opt;
  opt.reset(model);
  ForwardCache cache;
  Gradients grads;
  std::vector<std::size_t> order = split.train;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr = lr_at(epoch, cfg);
    RngEngine eng = make_engine(cfg.seed, 0xE000 + static_cast<std::uint64_t>(epoch));
    shuffle(eng, order);

    double loss_sum = 0.0;
    std::size_t sample_count = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t nb = std::min<std::size_t>(cfg.batch_size, order.size() - start);
      Mat batch(static_cast<int>(nb), static_cast<int>(feature_count));
      std::vector<double> y(nb);
      for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t i = order[start + b];
        std::copy(features[i].begin(), features[i].end(), batch.row(static_cast<int>(b)));
        y[b] = targets[i];
      }
      forward_batch(model, batch, cache);
      const double loss = backward_batch(model, cache, y, grads);
      if (!std::isfinite(loss))
        throw std::runtime_error("train: loss diverged (NaN) at epoch " + std::to_string(epoch));
      adamax_step(model, grads, lr, opt, cfg.adamax);
      loss_sum += loss * nb;
      sample_count += nb;
    }
    if (log) {
      const double val = detail::eval_rms(model, features, targets, split.val);
      log->push_back({epoch, lr, loss_sum / sample_count, val});
    }
    model.meta.epochs_trained = epoch;
  }
  return model;
}

/// Full-dataset entry point: extract features, apply the target scale,
/// split, fit, train.
inline MlpModel train(const std::vector<LabeledRecord>& records, std::vector<int> layer_sizes,
                      Activation activation, const TrainConfig& cfg,
                      std::vector<EpochLog>* log = nullptr,
                      TargetScale target_scale = TargetScale::SciRatio) {
  if (records.size() < 100) throw std::invalid_argument("train: need at least 100 records");
  std::vector<FeatureVector> features(records.size());
  std::vector<double> labels(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    features[i] = extract(records[i].scenario);
    labels[i] = records[i].eta / target_scale_value(target_scale, records[i].scenario);
  }
  MlpModel model =
      train_on_features(features, labels, std::move(layer_sizes), activation, cfg, log);
  model.target_scale = target_scale;
  return model;
}

// --- prediction --------------------------------------------------------------------

namespace detail {

inline double invert_target(const MlpModel& model, double y, const Scenario& scenario) {
  double value = denormalize_target(y, model.norm_stats);
  if (model.target_scale == TargetScale::SciRatio) {
    if (value < 1.0) value = 1.0;  // eta >= SCI for every plan
    value *= target_scale_value(TargetScale::SciRatio, scenario);
  }
  return value;
}

}  // namespace detail

/// extract -> normalize -> forward -> invert the target transform.
inline double predict_eta(const MlpModel& model, const Scenario& scenario) {
  const FeatureVector f = normalize(extract(scenario), model.norm_stats);
  return detail::invert_target(model, forward(model, f), scenario);
}

/// Batched prediction, single-threaded. Chunks keep the working set in cache;
/// results are identical to per-sample predict_eta.
inline std::vector<double> predict_etas(const MlpModel& model,
                                        const std::vector<Scenario>& scenarios) {
  constexpr std::size_t chunk = 256;
  std::vector<double> out(scenarios.size());
  ForwardCache cache;
  for (std::size_t start = 0; start < scenarios.size(); start += chunk) {
    const std::size_t nb = std::min(chunk, scenarios.size() - start);
    Mat batch(static_cast<int>(nb), static_cast<int>(feature_count));
    for (std::size_t b = 0; b < nb; ++b) {
      const FeatureVector f = normalize(extract(scenarios[start + b]), model.norm_stats);
      std::copy(f.begin(), f.end(), batch.row(static_cast<int>(b)));
    }
    const Mat& pred = forward_batch(model, batch, cache);
    for (std::size_t b = 0; b < nb; ++b)
      out[start + b] = detail::invert_target(model, pred.at(static_cast<int>(b), 0),
                                             scenarios[start + b]);
  }
  return out;
}

}  // namespace qot
