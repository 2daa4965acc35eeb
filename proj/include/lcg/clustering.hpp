#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lcg/embedding.hpp"

namespace lcg {

struct KMeansOptions {
  std::size_t k = 100;
  std::uint64_t seed = 0;
  std::size_t max_iter = 100;
  double tol = 1e-6;
  unsigned threads = 1;
};

/// Result of Lloyd's algorithm.
///
/// Invariants on a fitted model: every cluster is non-empty, assignment[i] is
/// the nearest centroid (lowest index on ties), distance[i] is the Euclidean
/// distance to it, and objective == sum of distance[i]^2.
struct ClusterModel {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<float> centroids;  // k x dim, row-major
  std::vector<std::uint32_t> assignment;
  std::vector<double> distance;
  double objective = 0.0;
  std::size_t iterations_run = 0;
  std::uint64_t seed = 0;
  /// Objective after the initial assignment and after every Lloyd iteration.
  std::vector<double> objective_history;

  std::span<const float> centroid(std::size_t c) const { return {centroids.data() + c * dim, dim}; }
  std::vector<std::size_t> cluster_sizes() const;
};

/// k-means++ seeding then Lloyd iterations until the relative objective
/// decrease drops below tol or max_iter is reached. Empty clusters are
/// reseeded at the point farthest from its centroid.
ClusterModel kmeans_fit(const EmbeddingMatrix& embeddings, const KMeansOptions& options);

/// Per-cluster arithmetic means (k x dim). Throws DataError on an empty cluster.
std::vector<float> compute_centroids(const EmbeddingMatrix& embeddings,
                                     std::span<const std::uint32_t> assignment, std::size_t k);

double squared_distance(std::span<const float> a, std::span<const float> b) noexcept;

/// Binary model file ("LCGK"): k, dim, centroids, assignment, distances, objective.
void save_cluster_model(const std::filesystem::path& path, const ClusterModel& model);
ClusterModel load_cluster_model(const std::filesystem::path& path);

/// Raw little-endian u32 array, one entry per record.
void save_assignment(const std::filesystem::path& path, std::span<const std::uint32_t> assignment);
std::vector<std::uint32_t> load_assignment(const std::filesystem::path& path);

}  // namespace lcg
