#include "lcg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lcg/error.hpp"
#include "lcg/parallel.hpp"
#include "lcg/random.hpp"

namespace lcg {

std::size_t histogram_bin(double confidence) noexcept {
  if (!(confidence > 0.0)) return 0;
  return std::min<std::size_t>(static_cast<std::size_t>(std::floor(confidence * 10.0)), 9);
}

ConfidenceHistogram build_histogram(std::span<const double> confidences) {
  ConfidenceHistogram h;
  for (double c : confidences) ++h.bins[histogram_bin(c)];
  h.total = confidences.size();
  return h;
}

ConfidenceHistogram build_histogram(std::span<const ScoredRecord> scores) {
  ConfidenceHistogram h;
  for (const auto& s : scores) ++h.bins[histogram_bin(s.confidence)];
  h.total = scores.size();
  return h;
}

std::string render_histogram(const ConfidenceHistogram& histogram, std::size_t width) {
  const std::size_t peak = *std::max_element(histogram.bins.begin(), histogram.bins.end());
  std::string out;
  char label[64];
  for (std::size_t b = 0; b < histogram.bins.size(); ++b) {
    std::snprintf(label, sizeof label, "[%.1f, %.1f%c %8zu ", b / 10.0, (b + 1) / 10.0, b == 9 ? ']' : ')',
                  histogram.bins[b]);
    out += label;
    const std::size_t bar = peak == 0 ? 0 : histogram.bins[b] * width / peak;
    out.append(bar, '#');
    out += '\n';
  }
  return out;
}

StratifiedSplit stratified_split(const CoreSet& coreset, std::size_t k, double train_fraction,
                                 std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must be in (0, 1)");
  std::vector<std::vector<CoreEntry>> by_class(k);
  for (const auto& e : coreset.entries) {
    if (e.pseudo_label >= k) throw DataError("stratified split: pseudo label out of range");
    by_class[e.pseudo_label].push_back(e);
  }
  Rng rng(seed);
  StratifiedSplit split;
  for (std::size_t c = 0; c < k; ++c) {
    auto& members = by_class[c];
    if (members.size() < 2) {
      throw DataError("coreset too small for a stratified split: class " + std::to_string(c) + " has " +
                      std::to_string(members.size()) + " sample(s), need at least 2");
    }
    std::sort(members.begin(), members.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    rng.shuffle(std::span<CoreEntry>(members));
    const auto n = members.size();
    const auto n_train = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n))), 1, n - 1);
    split.train.insert(split.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.heldout.insert(split.heldout.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
  }
  auto by_id = [](const CoreEntry& a, const CoreEntry& b) { return a.id < b.id; };
  std::sort(split.train.begin(), split.train.end(), by_id);
  std::sort(split.heldout.begin(), split.heldout.end(), by_id);
  return split;
}

std::vector<SweepRow> lr_sweep(const CoreSet& coreset, const EmbeddingMatrix& embeddings, std::size_t k,
                               const SweepOptions& options) {
  if (options.learning_rates.empty()) throw ConfigError("lr_sweep: no learning rates given");
  const auto split = stratified_split(coreset, k, options.train_fraction, options.train.seed);
  CoreSet train_set = coreset;
  train_set.entries = split.train;
  const auto remainder = remainder_ids(coreset, embeddings.rows);

  std::vector<SweepRow> rows;
  for (double lr : options.learning_rates) {
    MlpTrainOptions train = options.train;
    train.lr = lr;
    const auto model = mlp_train(train_set, embeddings, k, train).model;

    SweepRow row;
    row.lr = lr;
    row.train_size = split.train.size();
    row.heldout_size = split.heldout.size();
    std::size_t correct = 0;
    for (const auto& e : split.heldout) {
      if (argmax(mlp_forward(model, embeddings.row(e.id))) == e.pseudo_label) ++correct;
    }
    row.accuracy = static_cast<double>(correct) / static_cast<double>(split.heldout.size());

    std::vector<double> confidences(remainder.size());
    parallel_for(remainder.size(), options.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        confidences[i] = max_probability(mlp_forward(model, embeddings.row(remainder[i])));
      }
    });
    row.histogram = build_histogram(confidences);
    rows.push_back(row);
  }
  return rows;
}

nlohmann::ordered_json histogram_json(const ConfidenceHistogram& histogram) {
  return nlohmann::ordered_json(std::vector<std::size_t>(histogram.bins.begin(), histogram.bins.end()));
}

nlohmann::ordered_json sweep_json(std::span<const SweepRow> rows) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["lr"] = r.lr;
    row["accuracy"] = r.accuracy;
    row["train_size"] = r.train_size;
    row["heldout_size"] = r.heldout_size;
    row["histogram"] = histogram_json(r.histogram);
    out.push_back(std::move(row));
  }
  return out;
}

nlohmann::ordered_json build_report(const ConfidenceHistogram& histogram, const nlohmann::ordered_json& sweep,
                                    const nlohmann::ordered_json& selection_manifest) {
  nlohmann::ordered_json report;
  report["histogram"] = histogram_json(histogram);
  report["total"] = histogram.total;
  report["sweep"] = sweep.is_null() ? nlohmann::ordered_json::array() : sweep;
  report["selection"] = selection_manifest;
  return report;
}

}  // namespace lcg
