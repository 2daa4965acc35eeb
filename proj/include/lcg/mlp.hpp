#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lcg/activations.hpp"
#include "lcg/coreset.hpp"
#include "lcg/embedding.hpp"

namespace lcg {

inline constexpr std::size_t kDefaultHidden = 768;
/// Hard ceiling on training epochs; the classifier is meant to stay under-fit.
inline constexpr int kMaxEpochs = 3;

struct MlpShape {
  std::size_t input_dim = 0;
  std::size_t hidden = kDefaultHidden;
  std::size_t classes = 0;

  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

/// softmax(W2 * gelu(W1 * h + b1) + b2). W1 is hidden x input_dim and W2 is
/// classes x hidden, both row-major.
template <typename T>
struct MlpWeights {
  MlpShape shape;
  std::vector<T> w1, b1, w2, b2;

  static MlpWeights zeros(const MlpShape& s) {
    return {s, std::vector<T>(s.hidden * s.input_dim), std::vector<T>(s.hidden),
            std::vector<T>(s.classes * s.hidden), std::vector<T>(s.classes)};
  }

  template <typename U>
  MlpWeights<U> cast() const {
    auto conv = [](const std::vector<T>& v) { return std::vector<U>(v.begin(), v.end()); };
    return {shape, conv(w1), conv(b1), conv(w2), conv(b2)};
  }

  /// The four tensors in a fixed order, for generic per-parameter loops.
  std::vector<std::vector<T>*> tensors() { return {&w1, &b1, &w2, &b2}; }
};

struct MlpModel {
  MlpWeights<float> weights;
  int epochs_trained = 0;

  const MlpShape& shape() const noexcept { return weights.shape; }
};

struct MlpTrainOptions {
  std::size_t hidden = kDefaultHidden;
  double lr = 1e-5;
  int epochs = kMaxEpochs;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct MlpTrainResult {
  MlpModel model;
  /// Mean cross-entropy over the training set, before training and after each epoch.
  double initial_loss = 0.0;
  std::vector<double> epoch_loss;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases of each layer.
MlpWeights<double> mlp_init(const MlpShape& shape, std::uint64_t seed);

template <typename T>
ProbabilityVector mlp_forward(const MlpWeights<T>& weights, std::span<const float> h);

ProbabilityVector mlp_forward(const MlpModel& model, std::span<const float> h);

/// Mean cross-entropy of `samples` (rows of `x` labelled by pseudo_label).
double mlp_loss(const MlpWeights<double>& weights, const EmbeddingMatrix& x,
                std::span<const CoreEntry> samples);

/// Same loss; writes d(loss)/d(weights) into `grad` (resized as needed).
double mlp_loss_and_gradient(const MlpWeights<double>& weights, const EmbeddingMatrix& x,
                             std::span<const CoreEntry> samples, MlpWeights<double>& grad);

/// Minibatch Adam on the coreset for exactly options.epochs epochs (1..3).
/// Sample order is reshuffled each epoch from the seed.
MlpTrainResult mlp_train(const CoreSet& coreset, const EmbeddingMatrix& embeddings, std::size_t k,
                         const MlpTrainOptions& options);

void save_mlp(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_mlp(const std::filesystem::path& path);
MlpModel parse_mlp(std::span<const std::uint8_t> bytes);

}  // namespace lcg
