#include "lcg/embedding.hpp"

#include <cmath>
#include <cstring>

#include "lcg/binary_io.hpp"
#include "lcg/error.hpp"
#include "lcg/parallel.hpp"
#include "lcg/text.hpp"

namespace lcg {

std::pair<LcgeHeader, EmbeddingMatrix> parse_lcge(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes, "LCGE");
  auto magic = in.bytes(4);
  if (std::memcmp(magic.data(), kLcgeMagic, 4) != 0) throw DataError("LCGE: bad magic bytes");

  LcgeHeader header;
  header.version = in.u32();
  if (header.version != kLcgeVersion) {
    throw DataError("LCGE: unsupported version " + std::to_string(header.version));
  }
  header.count = in.u32();
  header.dim = in.u32();
  if (header.dim == 0) throw DataError("LCGE: dim must be positive");
  auto digest = in.bytes(32);
  std::copy(digest.begin(), digest.end(), header.digest.begin());

  const std::size_t values = std::size_t{header.count} * header.dim;
  if (in.remaining() != values * 4) {
    throw DataError("LCGE: payload holds " + std::to_string(in.remaining()) + " bytes, header implies " +
                    std::to_string(values * 4));
  }
  EmbeddingMatrix m(header.count, header.dim);
  for (std::size_t i = 0; i < values; ++i) m.data[i] = in.f32();
  return {header, std::move(m)};
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const Dataset& dataset) {
  const auto bytes = read_file_bytes(path);
  auto [header, matrix] = parse_lcge(bytes);
  if (header.count != dataset.size()) {
    throw DataError("LCGE: count " + std::to_string(header.count) + " does not match dataset size " +
                    std::to_string(dataset.size()));
  }
  if (header.digest != dataset.source_digest) {
    throw DataError("LCGE: dataset digest mismatch (file " + to_hex(header.digest) + ", dataset " +
                    to_hex(dataset.source_digest) + ")");
  }
  try {
    check_finite(matrix);
  } catch (const NumericError& e) {
    throw DataError(std::string("LCGE ") + e.what());
  }
  return std::move(matrix);
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& matrix,
                      const Digest& dataset_digest) {
  ByteWriter out;
  out.bytes(std::string_view(kLcgeMagic, 4));
  out.u32(kLcgeVersion);
  out.u32(static_cast<std::uint32_t>(matrix.rows));
  out.u32(static_cast<std::uint32_t>(matrix.dim));
  out.bytes(dataset_digest);
  out.f32s(matrix.data);
  write_file_bytes(path, out.buffer());
}

EmbeddingMatrix hashing_embed(const Dataset& dataset, std::size_t dim, unsigned threads) {
  if (dim < 2) throw ConfigError("hashing_embed: dim must be >= 2");
  EmbeddingMatrix m(dataset.size(), dim);
  parallel_for(dataset.size(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> counts(dim);
    for (std::size_t i = begin; i < end; ++i) {
      std::fill(counts.begin(), counts.end(), 0);
      const auto tokens = tokenize(record_text(dataset.records[i]));
      for (const auto& t : tokens) ++counts[fnv1a64(t) % dim];
      auto row = m.row(i);
      if (tokens.empty()) {
        row[0] = 1.0f;
        continue;
      }
      for (std::size_t b = 0; b < dim; ++b) {
        if (counts[b] != 0) row[b] = static_cast<float>(std::log1p(static_cast<double>(counts[b])));
      }
    }
  });
  return m;
}

EmbeddingMatrix l2_normalize(const EmbeddingMatrix& matrix, unsigned threads) {
  EmbeddingMatrix out = matrix;
  parallel_for(matrix.rows, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto row = out.row(i);
      double sq = 0.0;
      for (float v : row) sq += static_cast<double>(v) * v;
      if (!(sq > 0.0) || !std::isfinite(sq)) {
        throw NumericError("l2_normalize: row " + std::to_string(i) +
                           (sq == 0.0 ? " is all zeros" : " has a non-finite norm"));
      }
      const double norm = std::sqrt(sq);
      for (float& v : row) v = static_cast<float>(v / norm);
    }
  });
  out.normalized = true;
  return out;
}

void check_finite(const EmbeddingMatrix& matrix) {
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    for (float v : matrix.row(i)) {
      if (!std::isfinite(v)) throw NumericError("embeddings: non-finite value in row " + std::to_string(i));
    }
  }
}

}  // namespace lcg
