#pragma once

#include <filesystem>
#include <json.hpp>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "lcg/activations.hpp"
#include "lcg/coreset.hpp"
#include "lcg/mlp.hpp"
#include "lcg/naive_bayes.hpp"

namespace lcg {

struct ScoredRecord {
  RecordId id = 0;
  std::uint32_t cluster = 0;
  ProbabilityVector probabilities;
  /// max(probabilities)
  double confidence = 0.0;

  friend bool operator==(const ScoredRecord&, const ScoredRecord&) = default;
};

using Scorer = std::variant<MlpModel, NbModel>;

std::vector<ScoredRecord> score_all(const MlpModel& model, std::span<const RecordId> remainder,
                                    const EmbeddingMatrix& embeddings,
                                    std::span<const std::uint32_t> assignment, unsigned threads = 1);

std::vector<ScoredRecord> score_all(const NbModel& model, std::span<const RecordId> remainder,
                                    const Dataset& dataset, std::span<const std::uint32_t> assignment,
                                    unsigned threads = 1);

/// Dispatches on the scorer; the MLP reads `embeddings`, Naive Bayes reads `dataset`.
std::vector<ScoredRecord> score_all(const Scorer& scorer, std::span<const RecordId> remainder,
                                    const EmbeddingMatrix& embeddings, const Dataset& dataset,
                                    std::span<const std::uint32_t> assignment, unsigned threads = 1);

enum class SelectionStrategy { global_threshold, per_cluster_topk };

SelectionStrategy parse_selection_strategy(std::string_view name);
std::string_view to_string(SelectionStrategy strategy) noexcept;

struct SelectionOptions {
  SelectionStrategy strategy = SelectionStrategy::global_threshold;
  double tau = 0.7;
  std::size_t k_per_cluster = 1;
};

struct SelectionResult {
  std::vector<RecordId> selected_ids;  // ascending
  SelectionOptions options;
  std::vector<ScoredRecord> scores;
};

/// global_threshold keeps confidence < tau (tau in (1/K, 1]); per_cluster_topk
/// keeps the k lowest-confidence records of each cluster, ties by lower id.
SelectionResult select_gold(std::vector<ScoredRecord> scores, const SelectionOptions& options);

/// Gold ids, optionally unioned with the coreset ids. Ascending.
std::vector<RecordId> subset_ids(const SelectionResult& result, const CoreSet& coreset, bool include_coreset);

nlohmann::ordered_json selection_manifest(const SelectionResult& result, const CoreSet& coreset,
                                          std::size_t k, bool include_coreset);

/// JSONL {"id","cluster","confidence","probabilities"}.
void write_scores(const std::filesystem::path& path, std::span<const ScoredRecord> scores);
std::vector<ScoredRecord> read_scores(const std::filesystem::path& path);

}  // namespace lcg
