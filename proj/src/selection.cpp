#include "lcg/selection.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "lcg/binary_io.hpp"
#include "lcg/error.hpp"
#include "lcg/parallel.hpp"

namespace lcg {

namespace {

template <typename Predict>
std::vector<ScoredRecord> score_rows(std::span<const RecordId> remainder, std::size_t n,
                                     std::span<const std::uint32_t> assignment, unsigned threads,
                                     Predict&& predict) {
  if (assignment.size() != n) throw DataError("score_all: assignment length does not match the record count");
  for (RecordId id : remainder) {
    if (id >= n) throw DataError("score_all: record id " + std::to_string(id) + " out of range");
  }
  std::vector<ScoredRecord> out(remainder.size());
  parallel_for(remainder.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& s = out[i];
      s.id = remainder[i];
      s.cluster = assignment[s.id];
      s.probabilities = predict(s.id);
      s.confidence = max_probability(s.probabilities);
    }
  });
  return out;
}

}  // namespace

std::vector<ScoredRecord> score_all(const MlpModel& model, std::span<const RecordId> remainder,
                                    const EmbeddingMatrix& embeddings,
                                    std::span<const std::uint32_t> assignment, unsigned threads) {
  if (embeddings.dim != model.shape().input_dim) {
    throw DataError("score_all: embeddings have " + std::to_string(embeddings.dim) + " dims, model expects " +
                    std::to_string(model.shape().input_dim));
  }
  return score_rows(remainder, embeddings.rows, assignment, threads,
                    [&](RecordId id) { return mlp_forward(model, embeddings.row(id)); });
}

std::vector<ScoredRecord> score_all(const NbModel& model, std::span<const RecordId> remainder,
                                    const Dataset& dataset, std::span<const std::uint32_t> assignment,
                                    unsigned threads) {
  return score_rows(remainder, dataset.size(), assignment, threads,
                    [&](RecordId id) { return nb_predict(model, dataset.records[id]); });
}

std::vector<ScoredRecord> score_all(const Scorer& scorer, std::span<const RecordId> remainder,
                                    const EmbeddingMatrix& embeddings, const Dataset& dataset,
                                    std::span<const std::uint32_t> assignment, unsigned threads) {
  return std::visit(
      [&](const auto& model) {
        if constexpr (std::is_same_v<std::decay_t<decltype(model)>, MlpModel>) {
          return score_all(model, remainder, embeddings, assignment, threads);
        } else {
          return score_all(model, remainder, dataset, assignment, threads);
        }
      },
      scorer);
}

SelectionStrategy parse_selection_strategy(std::string_view name) {
  if (name == "threshold" || name == "global_threshold") return SelectionStrategy::global_threshold;
  if (name == "topk" || name == "per_cluster_topk") return SelectionStrategy::per_cluster_topk;
  throw ConfigError("unknown selection strategy '" + std::string(name) + "' (expected threshold or topk)");
}

std::string_view to_string(SelectionStrategy strategy) noexcept {
  return strategy == SelectionStrategy::global_threshold ? "threshold" : "topk";
}

SelectionResult select_gold(std::vector<ScoredRecord> scores, const SelectionOptions& options) {
  SelectionResult result;
  result.options = options;

  if (options.strategy == SelectionStrategy::global_threshold) {
    const std::size_t k = scores.empty() ? 0 : scores.front().probabilities.size();
    const double lower = k == 0 ? 0.0 : 1.0 / static_cast<double>(k);
    if (!(options.tau > lower && options.tau <= 1.0)) {
      throw ConfigError("select_gold: tau must be in (" + std::to_string(lower) + ", 1], got " +
                        std::to_string(options.tau));
    }
    for (const auto& s : scores) {
      if (s.confidence < options.tau) result.selected_ids.push_back(s.id);
    }
  } else {
    if (options.k_per_cluster < 1) throw ConfigError("select_gold: k_per_cluster must be >= 1");
    std::map<std::uint32_t, std::vector<const ScoredRecord*>> by_cluster;
    for (const auto& s : scores) by_cluster[s.cluster].push_back(&s);
    for (auto& [cluster, members] : by_cluster) {
      std::sort(members.begin(), members.end(), [](const ScoredRecord* a, const ScoredRecord* b) {
        return a->confidence != b->confidence ? a->confidence < b->confidence : a->id < b->id;
      });
      const std::size_t take = std::min(options.k_per_cluster, members.size());
      for (std::size_t i = 0; i < take; ++i) result.selected_ids.push_back(members[i]->id);
    }
  }
  std::sort(result.selected_ids.begin(), result.selected_ids.end());
  result.scores = std::move(scores);
  return result;
}

std::vector<RecordId> subset_ids(const SelectionResult& result, const CoreSet& coreset, bool include_coreset) {
  std::vector<RecordId> ids = result.selected_ids;
  if (include_coreset) {
    for (const auto& e : coreset.entries) ids.push_back(e.id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

nlohmann::ordered_json selection_manifest(const SelectionResult& result, const CoreSet& coreset,
                                          std::size_t k, bool include_coreset) {
  std::vector<std::size_t> per_cluster(k, 0);
  {
    std::vector<std::uint32_t> cluster_by_id;
    for (const auto& s : result.scores) {
      if (s.id >= cluster_by_id.size()) cluster_by_id.resize(s.id + 1, 0);
      cluster_by_id[s.id] = s.cluster;
    }
    for (RecordId id : result.selected_ids) {
      const auto c = cluster_by_id.at(id);
      if (c < k) ++per_cluster[c];
    }
  }

  nlohmann::ordered_json m;
  m["strategy"] = std::string(to_string(result.options.strategy));
  if (result.options.strategy == SelectionStrategy::global_threshold) {
    m["tau"] = result.options.tau;
  } else {
    m["k_per_cluster"] = result.options.k_per_cluster;
  }
  m["include_coreset"] = include_coreset;
  m["scored"] = result.scores.size();
  m["coreset"] = coreset.entries.size();
  m["selected"] = result.selected_ids.size();
  m["subset"] = subset_ids(result, coreset, include_coreset).size();
  m["selected_per_cluster"] = per_cluster;
  return m;
}

void write_scores(const std::filesystem::path& path, std::span<const ScoredRecord> scores) {
  std::string out;
  for (const auto& s : scores) {
    nlohmann::ordered_json obj;
    obj["id"] = s.id;
    obj["cluster"] = s.cluster;
    obj["confidence"] = s.confidence;
    obj["probabilities"] = s.probabilities;
    out += obj.dump();
    out += '\n';
  }
  write_file_text(path, out);
}

std::vector<ScoredRecord> read_scores(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  std::istringstream lines(std::string(bytes.begin(), bytes.end()));
  std::vector<ScoredRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      ScoredRecord s;
      s.id = obj.at("id").get<RecordId>();
      s.cluster = obj.at("cluster").get<std::uint32_t>();
      s.confidence = obj.at("confidence").get<double>();
      s.probabilities = obj.at("probabilities").get<ProbabilityVector>();
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace lcg
