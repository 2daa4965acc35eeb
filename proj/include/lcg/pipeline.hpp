#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "lcg/config.hpp"

namespace lcg {

/// File names written under PipelineConfig::out_dir.
namespace artifact {
inline constexpr std::string_view embeddings = "embeddings.lcge";
inline constexpr std::string_view clusters = "clusters.bin";
inline constexpr std::string_view assignment = "assignment.u32";
inline constexpr std::string_view cluster_report = "clusters.json";
inline constexpr std::string_view coreset = "coreset.jsonl";
inline constexpr std::string_view model = "model.bin";
inline constexpr std::string_view scores = "scores.jsonl";
inline constexpr std::string_view subset = "subset.jsonl";
inline constexpr std::string_view manifest = "manifest.json";
inline constexpr std::string_view report = "report.json";
inline constexpr std::string_view sweep = "sweep.json";
}  // namespace artifact

using LogFn = std::function<void(std::string_view)>;

struct PipelineSummary {
  std::size_t records = 0;
  std::size_t clusters = 0;
  std::size_t kmeans_iterations = 0;
  double objective = 0.0;
  std::size_t coreset = 0;
  std::size_t scored = 0;
  std::size_t selected = 0;
  std::size_t subset = 0;
};

/// load -> embed -> normalize -> kmeans -> coreset -> train -> score -> select -> report.
/// Errors are rethrown with the stage name prefixed; artifacts written by a
/// failed run are removed.
PipelineSummary run_pipeline(const PipelineConfig& config, const LogFn& log = {});

/// Individual stages. Each reads the previous stage's artifacts from out_dir
/// and writes its own, so running them in order reproduces run_pipeline.
void run_embed_stage(const PipelineConfig& config, const LogFn& log = {});
void run_cluster_stage(const PipelineConfig& config, const LogFn& log = {});
void run_coreset_stage(const PipelineConfig& config, const LogFn& log = {});
void run_train_stage(const PipelineConfig& config, const LogFn& log = {});
void run_score_stage(const PipelineConfig& config, const LogFn& log = {});
void run_select_stage(const PipelineConfig& config, const LogFn& log = {});
void run_report_stage(const PipelineConfig& config, const LogFn& log = {});
void run_sweep_stage(const PipelineConfig& config, const LogFn& log = {});

}  // namespace lcg
