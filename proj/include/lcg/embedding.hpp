#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "lcg/corpus.hpp"

namespace lcg {

inline constexpr std::size_t kDefaultEmbeddingDim = 384;

/// Row-major N x dim matrix of f32; row i belongs to record i.
struct EmbeddingMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<float> data;
  bool normalized = false;

  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows_, std::size_t dim_)
      : rows(rows_), dim(dim_), data(rows_ * dim_, 0.0f) {}

  std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
  std::span<float> row(std::size_t i) { return {data.data() + i * dim, dim}; }
};

/// LCGE on-disk layout (little-endian):
///   "LCGE" | u32 version=1 | u32 count | u32 dim | 32-byte SHA-256 of dataset | count*dim f32
inline constexpr char kLcgeMagic[4] = {'L', 'C', 'G', 'E'};
inline constexpr std::uint32_t kLcgeVersion = 1;

struct LcgeHeader {
  std::uint32_t version = 0;
  std::uint32_t count = 0;
  std::uint32_t dim = 0;
  Digest digest{};
};

/// Loads an LCGE file and checks it against `dataset` (count and digest).
/// Rejects non-finite values, naming the row. The result is not normalized.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const Dataset& dataset);

/// Parses LCGE bytes without dataset checks.
std::pair<LcgeHeader, EmbeddingMatrix> parse_lcge(std::span<const std::uint8_t> bytes);

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& matrix,
                      const Digest& dataset_digest);

/// Feature-hashing bag of words: FNV-1a(token) mod dim, per-bucket count v
/// mapped to ln(1 + v). Records without tokens get a one-hot at bucket 0.
EmbeddingMatrix hashing_embed(const Dataset& dataset, std::size_t dim = kDefaultEmbeddingDim,
                              unsigned threads = 1);

/// Divides each row by its L2 norm. All-zero rows throw NumericError naming the row.
EmbeddingMatrix l2_normalize(const EmbeddingMatrix& matrix, unsigned threads = 1);

/// Throws NumericError naming the first row with a NaN or Inf.
void check_finite(const EmbeddingMatrix& matrix);

}  // namespace lcg
