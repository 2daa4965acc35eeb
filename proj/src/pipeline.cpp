#include "lcg/pipeline.hpp"

#include <chrono>
#include <cstring>
#include <filesystem>
#include <json.hpp>

#include "lcg/binary_io.hpp"
#include "lcg/clustering.hpp"
#include "lcg/embedding.hpp"
#include "lcg/error.hpp"
#include "lcg/report.hpp"

namespace lcg {

namespace fs = std::filesystem;

namespace {

/// Removes every file it recorded unless commit() was called.
class ArtifactGuard {
 public:
  explicit ArtifactGuard(fs::path dir) : dir_(std::move(dir)) {}
  ArtifactGuard(const ArtifactGuard&) = delete;
  ArtifactGuard& operator=(const ArtifactGuard&) = delete;
  ~ArtifactGuard() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
  }

  fs::path path(std::string_view name) {
    fs::path p = dir_ / std::string(name);
    written_.push_back(p);
    return p;
  }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
  bool committed_ = false;
};

template <typename Fn>
auto with_stage(std::string_view stage, const LogFn& log, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&] {
    if (!log) return;
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    log(std::string(stage) + ": done in " + std::to_string(ms.count()) + " ms");
  };
  const std::string prefix = "stage '" + std::string(stage) + "': ";
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      finish();
    } else {
      auto result = fn();
      finish();
      return result;
    }
  } catch (const Error& e) {
    throw_error(e.kind(), prefix + e.what());
  } catch (const std::exception& e) {
    throw DataError(prefix + e.what());
  }
}

fs::path in_dir(const PipelineConfig& c, std::string_view name) { return c.out_dir / std::string(name); }

void ensure_out_dir(const PipelineConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw DataError("cannot create output directory '" + c.out_dir.string() + "': " + ec.message());
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) { write_file_text(path, j.dump(2) + "\n"); }

nlohmann::ordered_json read_json(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return nlohmann::ordered_json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---- in-memory stage bodies shared by run_pipeline and the subcommands ----

EmbeddingMatrix compute_embeddings(const PipelineConfig& c, const Dataset& ds) {
  if (c.provider == EmbeddingProvider::hashing) return hashing_embed(ds, c.dim, c.threads);
  if (!fs::exists(c.embeddings_path)) {
    throw DataError("embeddings file '" + c.embeddings_path.string() + "' does not exist");
  }
  return load_embeddings(c.embeddings_path, ds);
}

ClusterModel fit_clusters(const PipelineConfig& c, const EmbeddingMatrix& raw) {
  const auto normalized = l2_normalize(raw, c.threads);
  return kmeans_fit(normalized, {c.k, c.seed, c.max_iter, c.tol, c.threads});
}

void write_cluster_artifacts(ArtifactGuard& guard, const ClusterModel& model) {
  save_cluster_model(guard.path(artifact::clusters), model);
  save_assignment(guard.path(artifact::assignment), model.assignment);
  nlohmann::ordered_json j;
  j["k"] = model.k;
  j["seed"] = model.seed;
  j["iterations_run"] = model.iterations_run;
  j["objective"] = model.objective;
  j["cluster_sizes"] = model.cluster_sizes();
  write_json(guard.path(artifact::cluster_report), j);
}

MlpTrainOptions train_options(const PipelineConfig& c) {
  MlpTrainOptions o;
  o.hidden = c.hidden;
  o.lr = c.lr;
  o.epochs = c.epochs;
  o.batch_size = c.batch;
  o.seed = c.seed;
  return o;
}

Scorer train_scorer(const PipelineConfig& c, const CoreSet& coreset, const EmbeddingMatrix& raw,
                    const Dataset& ds) {
  if (c.classifier == ClassifierKind::mlp) return mlp_train(coreset, raw, c.k, train_options(c)).model;
  return nb_train(coreset, ds, c.k, c.alpha);
}

void save_scorer(const fs::path& path, const Scorer& scorer) {
  std::visit(
      [&](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, MlpModel>) save_mlp(path, m);
        else save_nb(path, m);
      },
      scorer);
}

Scorer load_scorer(const PipelineConfig& c, const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "LCGM", 4) == 0) {
    if (c.classifier != ClassifierKind::mlp) throw ConfigError("model file holds an MLP but classifier=mnb");
    return parse_mlp(bytes);
  }
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "LCGN", 4) == 0) {
    if (c.classifier != ClassifierKind::mnb) throw ConfigError("model file holds Naive Bayes but classifier=mlp");
    return parse_nb(bytes);
  }
  throw DataError(path.string() + ": not a model file");
}

SelectionOptions selection_options(const PipelineConfig& c) {
  return {c.strategy, c.tau, c.k_per_cluster};
}

SweepOptions sweep_options(const PipelineConfig& c) {
  SweepOptions o;
  o.learning_rates = c.lrs;
  o.train = train_options(c);
  o.threads = c.threads;
  return o;
}

void write_selection(ArtifactGuard& guard, const PipelineConfig& c, const Dataset& ds, const SelectionResult& sel,
                     const CoreSet& coreset) {
  write_subset(ds, subset_ids(sel, coreset, c.include_coreset), guard.path(artifact::subset));
  write_json(guard.path(artifact::manifest), selection_manifest(sel, coreset, c.k, c.include_coreset));
}

void write_report(ArtifactGuard& guard, const std::vector<ScoredRecord>& scores,
                  const nlohmann::ordered_json& sweep, const nlohmann::ordered_json& manifest) {
  write_json(guard.path(artifact::report), build_report(build_histogram(scores), sweep, manifest));
}

Dataset load_input_dataset(const PipelineConfig& c) {
  if (c.dataset.empty()) throw ConfigError("no dataset given");
  return load_dataset(c.dataset, c.format);
}

}  // namespace

PipelineSummary run_pipeline(const PipelineConfig& c, const LogFn& log) {
  validate_config(c);
  with_stage("setup", log, [&] { ensure_out_dir(c); });
  ArtifactGuard guard(c.out_dir);
  PipelineSummary summary;

  const auto ds = with_stage("load", log, [&] { return load_input_dataset(c); });
  summary.records = ds.size();

  const auto raw = with_stage("embed", log, [&] {
    auto m = compute_embeddings(c, ds);
    write_embeddings(guard.path(artifact::embeddings), m, ds.source_digest);
    return m;
  });

  const auto model = with_stage("cluster", log, [&] {
    auto m = fit_clusters(c, raw);
    write_cluster_artifacts(guard, m);
    return m;
  });
  summary.clusters = model.k;
  summary.kmeans_iterations = model.iterations_run;
  summary.objective = model.objective;

  const auto coreset = with_stage("coreset", log, [&] {
    auto cs = select_coreset(model, c.coreset_mode, c.coreset_param);
    write_coreset(guard.path(artifact::coreset), cs);
    return cs;
  });
  summary.coreset = coreset.size();

  const auto scorer = with_stage("train", log, [&] {
    auto s = train_scorer(c, coreset, raw, ds);
    save_scorer(guard.path(artifact::model), s);
    return s;
  });

  auto scores = with_stage("score", log, [&] {
    const auto remainder = remainder_ids(coreset, ds.size());
    auto s = score_all(scorer, remainder, raw, ds, model.assignment, c.threads);
    write_scores(guard.path(artifact::scores), s);
    return s;
  });
  summary.scored = scores.size();

  const auto selection = with_stage("select", log, [&] {
    auto sel = select_gold(scores, selection_options(c));
    write_selection(guard, c, ds, sel, coreset);
    return sel;
  });
  summary.selected = selection.selected_ids.size();
  summary.subset = subset_ids(selection, coreset, c.include_coreset).size();

  nlohmann::ordered_json sweep = nlohmann::ordered_json::array();
  if (c.sweep) {
    sweep = with_stage("sweep", log, [&] {
      auto rows = sweep_json(lr_sweep(coreset, raw, c.k, sweep_options(c)));
      write_json(guard.path(artifact::sweep), rows);
      return rows;
    });
  }

  with_stage("report", log, [&] {
    write_report(guard, scores, sweep, selection_manifest(selection, coreset, c.k, c.include_coreset));
  });

  guard.commit();
  return summary;
}

void run_embed_stage(const PipelineConfig& c, const LogFn& log) {
  with_stage("embed", log, [&] {
    ensure_out_dir(c);
    ArtifactGuard guard(c.out_dir);
    const auto ds = load_input_dataset(c);
    write_embeddings(guard.path(artifact::embeddings), compute_embeddings(c, ds), ds.source_digest);
    guard.commit();
  });
}

void run_cluster_stage(const PipelineConfig& c, const LogFn& log) {
  with_stage("cluster", log, [&] {
    ArtifactGuard guard(c.out_dir);
    const auto ds = load_input_dataset(c);
    const auto raw = load_embeddings(in_dir(c, artifact::embeddings), ds);
    write_cluster_artifacts(guard, fit_clusters(c, raw));
    guard.commit();
  });
}

void run_coreset_stage(const PipelineConfig& c, const LogFn& log) {
  with_stage("coreset", log, [&] {
    ArtifactGuard guard(c.out_dir);
    const auto model = load_cluster_model(in_dir(c, artifact::clusters));
    write_coreset(guard.path(artifact::coreset), select_coreset(model, c.coreset_mode, c.coreset_param));
    guard.commit();
  });
}

void run_train_stage(const PipelineConfig& c, const LogFn& log) {
  with_stage("train", log, [&] {
    ArtifactGuard guard(c.out_dir);
    const auto ds = load_input_dataset(c);
    const auto coreset = read_coreset(in_dir(c, artifact::coreset), c.k);
    EmbeddingMatrix raw;
    if (c.classifier == ClassifierKind::mlp) raw = load_embeddings(in_dir(c, artifact::embeddings), ds);
    save_scorer(guard.path(artifact::model), train_scorer(c, coreset, raw, ds));
    guard.commit();
  });
}

void run_score_stage(const PipelineConfig& c, const LogFn& log) {
  with_stage("score", log, [&] {
    ArtifactGuard guard(c.out_dir);
    const auto ds = load_input_dataset(c);
    const auto model = load_cluster_model(in_dir(c, artifact::clusters));
    const auto coreset = read_coreset(in_dir(c, artifact::coreset), model.k);
    const auto scorer = load_scorer(c, in_dir(c, artifact::model));
    EmbeddingMatrix raw;
    if (std::holds_alternative<MlpModel>(scorer)) raw = load_embeddings(in_dir(c, artifact::embeddings), ds);
    const auto remainder = remainder_ids(coreset, ds.size());
    write_scores(guard.path(artifact::scores), score_all(scorer, remainder, raw, ds, model.assignment, c.threads));
    guard.commit();
  });
}

void run_select_stage(const PipelineConfig& c, const LogFn& log) {
  with_stage("select", log, [&] {
    ArtifactGuard guard(c.out_dir);
    const auto ds = load_input_dataset(c);
    const auto coreset = read_coreset(in_dir(c, artifact::coreset), c.k);
    const auto sel = select_gold(read_scores(in_dir(c, artifact::scores)), selection_options(c));
    write_selection(guard, c, ds, sel, coreset);
    guard.commit();
  });
}

void run_report_stage(const PipelineConfig& c, const LogFn& log) {
  with_stage("report", log, [&] {
    ArtifactGuard guard(c.out_dir);
    const auto scores = read_scores(in_dir(c, artifact::scores));
    const auto manifest = read_json(in_dir(c, artifact::manifest));
    nlohmann::ordered_json sweep = nlohmann::ordered_json::array();
    if (c.sweep) sweep = read_json(in_dir(c, artifact::sweep));
    write_report(guard, scores, sweep, manifest);
    guard.commit();
  });
}

void run_sweep_stage(const PipelineConfig& c, const LogFn& log) {
  with_stage("sweep", log, [&] {
    ArtifactGuard guard(c.out_dir);
    const auto ds = load_input_dataset(c);
    const auto raw = load_embeddings(in_dir(c, artifact::embeddings), ds);
    const auto coreset = read_coreset(in_dir(c, artifact::coreset), c.k);
    write_json(guard.path(artifact::sweep), sweep_json(lr_sweep(coreset, raw, c.k, sweep_options(c))));
    guard.commit();
  });
}

}  // namespace lcg
