#pragma once

#include <array>
#include <cstdint>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "lcg/clustering.hpp"
#include "lcg/coreset.hpp"
#include "lcg/mlp.hpp"
#include "lcg/selection.hpp"

namespace lcg {

/// Ten equal-width bins over [0, 1]; 1.0 lands in the last bin.
struct ConfidenceHistogram {
  std::array<std::size_t, 10> bins{};
  std::size_t total = 0;

  friend bool operator==(const ConfidenceHistogram&, const ConfidenceHistogram&) = default;
};

std::size_t histogram_bin(double confidence) noexcept;
ConfidenceHistogram build_histogram(std::span<const double> confidences);
ConfidenceHistogram build_histogram(std::span<const ScoredRecord> scores);

/// Plain-text bar chart, one line per bin.
std::string render_histogram(const ConfidenceHistogram& histogram, std::size_t width = 40);

struct StratifiedSplit {
  std::vector<CoreEntry> train;
  std::vector<CoreEntry> heldout;
};

/// Per class: shuffle (seeded), train gets round(train_fraction * n) clamped
/// to [1, n-1]. Every class needs at least two samples.
StratifiedSplit stratified_split(const CoreSet& coreset, std::size_t k, double train_fraction,
                                 std::uint64_t seed);

inline const std::vector<double> kDefaultSweepRates = {1e-4, 1e-5, 1e-6};

struct SweepOptions {
  std::vector<double> learning_rates = kDefaultSweepRates;
  MlpTrainOptions train;  // lr is overridden per row
  double train_fraction = 0.8;
  unsigned threads = 1;
};

struct SweepRow {
  double lr = 0.0;
  /// Held-out pseudo-label accuracy (argmax, lowest index on ties).
  double accuracy = 0.0;
  std::size_t train_size = 0;
  std::size_t heldout_size = 0;
  ConfidenceHistogram histogram;  // confidences over the non-coreset remainder
};

/// Trains one MLP per learning rate on an identical stratified split.
std::vector<SweepRow> lr_sweep(const CoreSet& coreset, const EmbeddingMatrix& embeddings, std::size_t k,
                               const SweepOptions& options);

nlohmann::ordered_json histogram_json(const ConfidenceHistogram& histogram);
nlohmann::ordered_json sweep_json(std::span<const SweepRow> rows);

/// {"histogram", "total", "sweep", "selection"}
nlohmann::ordered_json build_report(const ConfidenceHistogram& histogram, const nlohmann::ordered_json& sweep,
                                    const nlohmann::ordered_json& selection_manifest);

}  // namespace lcg
