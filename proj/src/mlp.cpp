#include "lcg/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "lcg/binary_io.hpp"
#include "lcg/error.hpp"
#include "lcg/random.hpp"

namespace lcg {

namespace {

constexpr char kMlpMagic[4] = {'L', 'C', 'G', 'M'};
constexpr std::uint32_t kMlpVersion = 1;

template <typename T>
void check_input(const MlpWeights<T>& w, std::span<const float> h) {
  if (h.size() != w.shape.input_dim) {
    throw DataError("mlp: input has " + std::to_string(h.size()) + " dims, model expects " +
                    std::to_string(w.shape.input_dim));
  }
}

/// Forward pass keeping the hidden pre-activations for backprop.
template <typename T>
ProbabilityVector forward(const MlpWeights<T>& w, std::span<const float> h, std::vector<double>& pre,
                          std::vector<double>& act) {
  const auto& s = w.shape;
  pre.resize(s.hidden);
  act.resize(s.hidden);
  for (std::size_t j = 0; j < s.hidden; ++j) {
    const T* row = w.w1.data() + j * s.input_dim;
    double z = static_cast<double>(w.b1[j]);
    for (std::size_t i = 0; i < s.input_dim; ++i) z += static_cast<double>(row[i]) * h[i];
    pre[j] = z;
    act[j] = gelu(z);
  }
  std::vector<double> logits(s.classes);
  for (std::size_t c = 0; c < s.classes; ++c) {
    const T* row = w.w2.data() + c * s.hidden;
    double z = static_cast<double>(w.b2[c]);
    for (std::size_t j = 0; j < s.hidden; ++j) z += static_cast<double>(row[j]) * act[j];
    logits[c] = z;
  }
  return softmax(logits);
}

void check_samples(const EmbeddingMatrix& x, std::span<const CoreEntry> samples, std::size_t classes) {
  for (const auto& e : samples) {
    if (e.id >= x.rows) throw DataError("mlp: sample id " + std::to_string(e.id) + " out of range");
    if (e.pseudo_label >= classes) throw DataError("mlp: label " + std::to_string(e.pseudo_label) + " out of range");
  }
}

double sample_loss(const ProbabilityVector& p, std::uint32_t label) {
  return -std::log(std::max(p[label], std::numeric_limits<double>::min()));
}

}  // namespace

MlpWeights<double> mlp_init(const MlpShape& shape, std::uint64_t seed) {
  Rng rng(seed);
  auto w = MlpWeights<double>::zeros(shape);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(shape.input_dim));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(shape.hidden));
  for (auto& v : w.w1) v = rng.uniform(-bound1, bound1);
  for (auto& v : w.b1) v = rng.uniform(-bound1, bound1);
  for (auto& v : w.w2) v = rng.uniform(-bound2, bound2);
  for (auto& v : w.b2) v = rng.uniform(-bound2, bound2);
  return w;
}

template <typename T>
ProbabilityVector mlp_forward(const MlpWeights<T>& weights, std::span<const float> h) {
  check_input(weights, h);
  std::vector<double> pre, act;
  return forward(weights, h, pre, act);
}

template ProbabilityVector mlp_forward<float>(const MlpWeights<float>&, std::span<const float>);
template ProbabilityVector mlp_forward<double>(const MlpWeights<double>&, std::span<const float>);

ProbabilityVector mlp_forward(const MlpModel& model, std::span<const float> h) {
  return mlp_forward(model.weights, h);
}

double mlp_loss(const MlpWeights<double>& weights, const EmbeddingMatrix& x,
                std::span<const CoreEntry> samples) {
  if (samples.empty()) return 0.0;
  check_samples(x, samples, weights.shape.classes);
  std::vector<double> pre, act;
  double total = 0.0;
  for (const auto& e : samples) {
    const auto row = x.row(e.id);
    check_input(weights, row);
    total += sample_loss(forward(weights, row, pre, act), e.pseudo_label);
  }
  return total / static_cast<double>(samples.size());
}

double mlp_loss_and_gradient(const MlpWeights<double>& weights, const EmbeddingMatrix& x,
                             std::span<const CoreEntry> samples, MlpWeights<double>& grad) {
  const auto& s = weights.shape;
  grad = MlpWeights<double>::zeros(s);
  if (samples.empty()) return 0.0;
  check_samples(x, samples, s.classes);

  const double scale = 1.0 / static_cast<double>(samples.size());
  std::vector<double> pre, act, dact(s.hidden);
  double total = 0.0;
  for (const auto& e : samples) {
    const auto row = x.row(e.id);
    check_input(weights, row);
    auto p = forward(weights, row, pre, act);
    total += sample_loss(p, e.pseudo_label);

    // d(loss)/d(logits) = (p - onehot) / B
    p[e.pseudo_label] -= 1.0;
    std::fill(dact.begin(), dact.end(), 0.0);
    for (std::size_t c = 0; c < s.classes; ++c) {
      const double g = p[c] * scale;
      grad.b2[c] += g;
      double* gw2 = grad.w2.data() + c * s.hidden;
      const double* w2 = weights.w2.data() + c * s.hidden;
      for (std::size_t j = 0; j < s.hidden; ++j) {
        gw2[j] += g * act[j];
        dact[j] += g * w2[j];
      }
    }
    for (std::size_t j = 0; j < s.hidden; ++j) {
      const double dpre = dact[j] * gelu_derivative(pre[j]);
      grad.b1[j] += dpre;
      double* gw1 = grad.w1.data() + j * s.input_dim;
      for (std::size_t i = 0; i < s.input_dim; ++i) gw1[i] += dpre * row[i];
    }
  }
  return total * scale;
}

MlpTrainResult mlp_train(const CoreSet& coreset, const EmbeddingMatrix& embeddings, std::size_t k,
                         const MlpTrainOptions& options) {
  if (options.epochs < 1 || options.epochs > kMaxEpochs) {
    throw ConfigError("mlp_train: epochs must be in 1.." + std::to_string(kMaxEpochs) + ", got " +
                      std::to_string(options.epochs));
  }
  if (!(options.lr > 0.0) || !std::isfinite(options.lr)) throw ConfigError("mlp_train: lr must be positive");
  if (options.batch_size < 1) throw ConfigError("mlp_train: batch size must be >= 1");
  if (options.hidden < 1) throw ConfigError("mlp_train: hidden width must be >= 1");
  if (k < 1) throw ConfigError("mlp_train: k must be >= 1");
  if (coreset.entries.empty()) throw DataError("mlp_train: coreset is empty");

  std::vector<bool> present(k, false);
  for (const auto& e : coreset.entries) {
    if (e.pseudo_label >= k) throw DataError("mlp_train: pseudo label out of range");
    present[e.pseudo_label] = true;
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (!present[c]) throw DataError("mlp_train: class " + std::to_string(c) + " has no coreset samples");
  }

  const MlpShape shape{embeddings.dim, options.hidden, k};
  Rng rng(options.seed);
  auto weights = mlp_init(shape, rng.next_u64());
  auto m = MlpWeights<double>::zeros(shape);
  auto v = MlpWeights<double>::zeros(shape);
  MlpWeights<double> grad;

  MlpTrainResult result;
  result.initial_loss = mlp_loss(weights, embeddings, coreset.entries);

  std::vector<CoreEntry> order = coreset.entries;
  std::vector<CoreEntry> batch;
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span<CoreEntry>(order));
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                   order.begin() + static_cast<std::ptrdiff_t>(end));
      const double loss = mlp_loss_and_gradient(weights, embeddings, batch, grad);
      if (!std::isfinite(loss)) throw NumericError("mlp_train: non-finite loss in epoch " + std::to_string(epoch + 1));

      ++step;
      const double bc1 = 1.0 - std::pow(options.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(options.beta2, static_cast<double>(step));
      auto params = weights.tensors();
      auto grads = grad.tensors();
      auto moments1 = m.tensors();
      auto moments2 = v.tensors();
      for (std::size_t t = 0; t < params.size(); ++t) {
        auto& p = *params[t];
        const auto& g = *grads[t];
        auto& m1 = *moments1[t];
        auto& m2 = *moments2[t];
        for (std::size_t i = 0; i < p.size(); ++i) {
          m1[i] = options.beta1 * m1[i] + (1.0 - options.beta1) * g[i];
          m2[i] = options.beta2 * m2[i] + (1.0 - options.beta2) * g[i] * g[i];
          p[i] -= options.lr * (m1[i] / bc1) / (std::sqrt(m2[i] / bc2) + options.epsilon);
        }
      }
    }
    const double epoch_loss = mlp_loss(weights, embeddings, coreset.entries);
    if (!std::isfinite(epoch_loss)) {
      throw NumericError("mlp_train: non-finite loss after epoch " + std::to_string(epoch + 1));
    }
    result.epoch_loss.push_back(epoch_loss);
  }

  result.model.weights = weights.cast<float>();
  result.model.epochs_trained = options.epochs;
  for (auto* tensor : result.model.weights.tensors()) {
    for (float f : *tensor) {
      if (!std::isfinite(f)) throw NumericError("mlp_train: non-finite parameter after training");
    }
  }
  return result;
}

void save_mlp(const std::filesystem::path& path, const MlpModel& model) {
  const auto& s = model.shape();
  ByteWriter out;
  out.bytes(std::string_view(kMlpMagic, 4));
  out.u32(kMlpVersion);
  out.u32(static_cast<std::uint32_t>(s.input_dim));
  out.u32(static_cast<std::uint32_t>(s.hidden));
  out.u32(static_cast<std::uint32_t>(s.classes));
  out.u32(static_cast<std::uint32_t>(model.epochs_trained));
  out.f32s(model.weights.w1);
  out.f32s(model.weights.b1);
  out.f32s(model.weights.w2);
  out.f32s(model.weights.b2);
  write_file_bytes(path, out.buffer());
}

MlpModel parse_mlp(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes, "LCGM");
  if (std::memcmp(in.bytes(4).data(), kMlpMagic, 4) != 0) throw DataError("LCGM: bad magic");
  if (in.u32() != kMlpVersion) throw DataError("LCGM: unsupported version");
  MlpShape s;
  s.input_dim = in.u32();
  s.hidden = in.u32();
  s.classes = in.u32();
  MlpModel model;
  model.epochs_trained = static_cast<int>(in.u32());
  if (model.epochs_trained > kMaxEpochs) throw DataError("LCGM: epochs_trained exceeds the epoch ceiling");
  model.weights = MlpWeights<float>::zeros(s);
  for (auto* tensor : model.weights.tensors()) {
    for (auto& f : *tensor) {
      f = in.f32();
      if (!std::isfinite(f)) throw DataError("LCGM: non-finite parameter");
    }
  }
  if (in.remaining() != 0) throw DataError("LCGM: trailing bytes");
  return model;
}

MlpModel load_mlp(const std::filesystem::path& path) { return parse_mlp(read_file_bytes(path)); }

}  // namespace lcg
