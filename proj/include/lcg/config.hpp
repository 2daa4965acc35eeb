#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lcg/coreset.hpp"
#include "lcg/corpus.hpp"
#include "lcg/report.hpp"
#include "lcg/selection.hpp"

namespace lcg {

enum class EmbeddingProvider { hashing, lcge };
enum class ClassifierKind { mlp, mnb };

/// Every pipeline knob. Config files and command-line flags share these key names.
struct PipelineConfig {
  std::filesystem::path dataset;
  DatasetFormat format = DatasetFormat::jsonl;
  EmbeddingProvider provider = EmbeddingProvider::hashing;
  std::filesystem::path embeddings_path;
  std::size_t dim = 384;
  std::size_t k = 100;
  std::uint64_t seed = 0;
  std::size_t max_iter = 100;
  double tol = 1e-6;
  CoresetMode coreset_mode = CoresetMode::nearest_fraction;
  double coreset_param = 0.03;
  ClassifierKind classifier = ClassifierKind::mlp;
  double lr = 1e-5;
  int epochs = 3;
  std::size_t batch = 32;
  std::size_t hidden = 768;
  double alpha = 1.0;
  SelectionStrategy strategy = SelectionStrategy::global_threshold;
  double tau = 0.7;
  std::size_t k_per_cluster = 1;
  bool include_coreset = false;
  bool sweep = false;
  std::vector<double> lrs = kDefaultSweepRates;
  std::filesystem::path out_dir = "lcg_out";
  unsigned threads = 1;
};

/// Recognised keys, in documentation order.
const std::vector<std::string>& config_keys();

/// Throws ConfigError for unknown keys or unparsable values.
void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value);

/// key = value lines; '#' or ';' comments; [section] headers are accepted and ignored.
void apply_config_text(PipelineConfig& config, std::string_view text);
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);

/// Cross-field checks (dataset present, lcge path when provider=lcge, ranges).
void validate_config(const PipelineConfig& config);

std::string_view to_string(EmbeddingProvider provider) noexcept;
std::string_view to_string(ClassifierKind kind) noexcept;

}  // namespace lcg
