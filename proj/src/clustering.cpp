#include "lcg/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "lcg/binary_io.hpp"
#include "lcg/error.hpp"
#include "lcg/parallel.hpp"
#include "lcg/random.hpp"

namespace lcg {

namespace {

constexpr char kClusterMagic[4] = {'L', 'C', 'G', 'K'};
constexpr std::uint32_t kClusterVersion = 1;

void copy_row(std::span<const float> src, std::vector<float>& centroids, std::size_t c) {
  std::copy(src.begin(), src.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * src.size()));
}

std::vector<float> kmeanspp_init(const EmbeddingMatrix& x, std::size_t k, Rng& rng, unsigned threads) {
  const std::size_t n = x.rows;
  std::vector<float> centroids(k * x.dim);
  std::vector<double> min_sq(n);

  copy_row(x.row(rng.below(n)), centroids, 0);
  for (std::size_t c = 1; c <= k; ++c) {
    const std::span<const float> latest(centroids.data() + (c - 1) * x.dim, x.dim);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const double d = squared_distance(x.row(i), latest);
        min_sq[i] = (c == 1) ? d : std::min(min_sq[i], d);
      }
    });
    if (c == k) break;

    double total = 0.0;
    for (double v : min_sq) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cumulative = 0.0;
      std::size_t last_positive = 0;
      bool found = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (min_sq[i] <= 0.0) continue;
        last_positive = i;
        cumulative += min_sq[i];
        if (cumulative > target) {
          pick = i;
          found = true;
          break;
        }
      }
      if (!found) pick = last_positive;
    } else {
      pick = rng.below(n);
    }
    copy_row(x.row(pick), centroids, c);
  }
  return centroids;
}

struct Assigner {
  const EmbeddingMatrix& x;
  std::size_t k;
  unsigned threads;

  /// Nearest-centroid assignment; returns objective.
  double assign(const std::vector<float>& centroids, std::vector<std::uint32_t>& assignment,
                std::vector<double>& sq) const {
    parallel_for(x.rows, threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const auto row = x.row(i);
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_c = 0;
        for (std::size_t c = 0; c < k; ++c) {
          const double d = squared_distance(row, {centroids.data() + c * x.dim, x.dim});
          if (d < best) {
            best = d;
            best_c = static_cast<std::uint32_t>(c);
          }
        }
        assignment[i] = best_c;
        sq[i] = best;
      }
    });
    double total = 0.0;
    for (double v : sq) total += v;
    return total;
  }

  /// Moves the farthest point of a multi-member cluster into each empty
  /// cluster. Returns true if anything was repaired.
  bool repair_empty(std::vector<float>& centroids, std::vector<std::uint32_t>& assignment,
                    std::vector<double>& sq) const {
    std::vector<std::size_t> sizes(k, 0);
    for (auto a : assignment) ++sizes[a];
    bool repaired = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t donor = x.rows;
      double farthest = -1.0;
      for (std::size_t i = 0; i < x.rows; ++i) {
        if (sizes[assignment[i]] > 1 && sq[i] > farthest) {
          farthest = sq[i];
          donor = i;
        }
      }
      if (donor == x.rows) throw NumericError("kmeans: cannot repair empty cluster " + std::to_string(c));
      --sizes[assignment[donor]];
      assignment[donor] = static_cast<std::uint32_t>(c);
      sizes[c] = 1;
      sq[donor] = 0.0;
      copy_row(x.row(donor), centroids, c);
      repaired = true;
    }
    return repaired;
  }

  double assign_and_repair(std::vector<float>& centroids, std::vector<std::uint32_t>& assignment,
                           std::vector<double>& sq) const {
    double objective = assign(centroids, assignment, sq);
    // Reassigning after a repair can only lower the objective; with duplicate
    // points it may re-empty a cluster, so the last repair is kept as is.
    for (int round = 0; round < 4 && repair_empty(centroids, assignment, sq); ++round) {
      std::vector<std::uint32_t> candidate(assignment.size());
      std::vector<double> candidate_sq(sq.size());
      const double next = assign(centroids, candidate, candidate_sq);
      std::vector<std::size_t> sizes(k, 0);
      for (auto a : candidate) ++sizes[a];
      objective = 0.0;
      for (double v : sq) objective += v;
      if (std::find(sizes.begin(), sizes.end(), 0) != sizes.end()) continue;
      assignment = std::move(candidate);
      sq = std::move(candidate_sq);
      objective = next;
      break;
    }
    return objective;
  }
};

}  // namespace

double squared_distance(std::span<const float> a, std::span<const float> b) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = static_cast<double>(a[j]) - static_cast<double>(b[j]);
    s += d * d;
  }
  return s;
}

std::vector<std::size_t> ClusterModel::cluster_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assignment) ++sizes.at(a);
  return sizes;
}

std::vector<float> compute_centroids(const EmbeddingMatrix& embeddings,
                                     std::span<const std::uint32_t> assignment, std::size_t k) {
  if (assignment.size() != embeddings.rows) {
    throw DataError("compute_centroids: assignment length does not match embedding rows");
  }
  std::vector<double> sums(k * embeddings.dim, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < embeddings.rows; ++i) {
    const std::size_t c = assignment[i];
    if (c >= k) throw DataError("compute_centroids: cluster index " + std::to_string(c) + " out of range");
    ++counts[c];
    const auto row = embeddings.row(i);
    double* acc = sums.data() + c * embeddings.dim;
    for (std::size_t j = 0; j < embeddings.dim; ++j) acc[j] += row[j];
  }
  std::vector<float> centroids(k * embeddings.dim);
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) throw DataError("compute_centroids: cluster " + std::to_string(c) + " is empty");
    for (std::size_t j = 0; j < embeddings.dim; ++j) {
      centroids[c * embeddings.dim + j] =
          static_cast<float>(sums[c * embeddings.dim + j] / static_cast<double>(counts[c]));
    }
  }
  return centroids;
}

ClusterModel kmeans_fit(const EmbeddingMatrix& embeddings, const KMeansOptions& options) {
  const std::size_t n = embeddings.rows;
  const std::size_t k = options.k;
  if (k < 1) throw ConfigError("kmeans: k must be >= 1");
  if (k > n) {
    throw ConfigError("kmeans: k=" + std::to_string(k) + " exceeds the number of points " + std::to_string(n));
  }
  if (options.max_iter < 1) throw ConfigError("kmeans: max_iter must be >= 1");
  if (!(options.tol >= 0.0)) throw ConfigError("kmeans: tol must be non-negative");
  check_finite(embeddings);

  Rng rng(options.seed);
  const Assigner assigner{embeddings, k, options.threads};

  ClusterModel model;
  model.k = k;
  model.dim = embeddings.dim;
  model.seed = options.seed;
  model.centroids = kmeanspp_init(embeddings, k, rng, options.threads);
  model.assignment.assign(n, 0);
  std::vector<double> sq(n, 0.0);

  double objective = assigner.assign_and_repair(model.centroids, model.assignment, sq);
  model.objective_history.push_back(objective);

  for (std::size_t iter = 1; iter <= options.max_iter; ++iter) {
    const auto previous_assignment = model.assignment;
    const double previous = objective;
    model.centroids = compute_centroids(embeddings, model.assignment, k);
    objective = assigner.assign_and_repair(model.centroids, model.assignment, sq);
    if (!std::isfinite(objective)) throw NumericError("kmeans: objective became non-finite");
    model.objective_history.push_back(objective);
    model.iterations_run = iter;
    if (model.assignment == previous_assignment) break;
    if (previous <= 0.0 || (previous - objective) < options.tol * previous) break;
  }

  model.distance.resize(n);
  for (std::size_t i = 0; i < n; ++i) model.distance[i] = std::sqrt(sq[i]);
  model.objective = objective;
  return model;
}

void save_cluster_model(const std::filesystem::path& path, const ClusterModel& model) {
  ByteWriter out;
  out.bytes(std::string_view(kClusterMagic, 4));
  out.u32(kClusterVersion);
  out.u32(static_cast<std::uint32_t>(model.assignment.size()));
  out.u32(static_cast<std::uint32_t>(model.k));
  out.u32(static_cast<std::uint32_t>(model.dim));
  out.u64(model.seed);
  out.u32(static_cast<std::uint32_t>(model.iterations_run));
  out.f64(model.objective);
  out.f32s(model.centroids);
  for (auto a : model.assignment) out.u32(a);
  out.f64s(model.distance);
  out.u32(static_cast<std::uint32_t>(model.objective_history.size()));
  out.f64s(model.objective_history);
  write_file_bytes(path, out.buffer());
}

ClusterModel load_cluster_model(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  ByteReader in(bytes, path.string());
  if (std::memcmp(in.bytes(4).data(), kClusterMagic, 4) != 0) throw DataError(path.string() + ": bad magic");
  if (in.u32() != kClusterVersion) throw DataError(path.string() + ": unsupported version");
  ClusterModel m;
  const std::size_t n = in.u32();
  m.k = in.u32();
  m.dim = in.u32();
  m.seed = in.u64();
  m.iterations_run = in.u32();
  m.objective = in.f64();
  m.centroids.resize(m.k * m.dim);
  for (auto& v : m.centroids) v = in.f32();
  m.assignment.resize(n);
  for (auto& a : m.assignment) {
    a = in.u32();
    if (a >= m.k) throw DataError(path.string() + ": assignment out of range");
  }
  m.distance.resize(n);
  for (auto& d : m.distance) d = in.f64();
  m.objective_history.resize(in.u32());
  for (auto& h : m.objective_history) h = in.f64();
  return m;
}

void save_assignment(const std::filesystem::path& path, std::span<const std::uint32_t> assignment) {
  ByteWriter out;
  for (auto a : assignment) out.u32(a);
  write_file_bytes(path, out.buffer());
}

std::vector<std::uint32_t> load_assignment(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() % 4 != 0) throw DataError(path.string() + ": size is not a multiple of 4");
  ByteReader in(bytes, path.string());
  std::vector<std::uint32_t> out(bytes.size() / 4);
  for (auto& a : out) a = in.u32();
  return out;
}

}  // namespace lcg
