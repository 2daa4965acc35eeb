#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "lcg/clustering.hpp"
#include "lcg/corpus.hpp"

namespace lcg {

enum class CoresetMode { nearest_fraction, distance_percentile };

CoresetMode parse_coreset_mode(std::string_view name);
std::string_view to_string(CoresetMode mode) noexcept;

struct CoreEntry {
  RecordId id = 0;
  std::uint32_t pseudo_label = 0;
  double distance = 0.0;

  friend bool operator==(const CoreEntry&, const CoreEntry&) = default;
};

/// Pseudo-labelled training set. Entries are ordered by (pseudo_label, id).
struct CoreSet {
  std::vector<CoreEntry> entries;
  CoresetMode mode = CoresetMode::nearest_fraction;
  double parameter = 0.03;
  std::size_t num_classes = 0;
  /// Per-cluster distance threshold; only filled in distance_percentile mode.
  std::vector<double> gamma_per_cluster;

  std::size_t size() const noexcept { return entries.size(); }
};

/// nearest_fraction: per cluster of size n, the max(1, floor(f*n)) closest
/// points, ties by id. distance_percentile: per cluster, gamma = nearest-rank
/// p-th percentile of distances, points strictly below gamma (at least the
/// closest one).
CoreSet select_coreset(const ClusterModel& model, CoresetMode mode, double parameter);

/// Ids 0..n-1 not in the coreset, ascending.
std::vector<RecordId> remainder_ids(const CoreSet& coreset, std::size_t n);

/// JSONL, one {"id","pseudo_label","distance"} object per line.
void write_coreset(const std::filesystem::path& path, const CoreSet& coreset);
CoreSet read_coreset(const std::filesystem::path& path, std::size_t num_classes);

}  // namespace lcg
