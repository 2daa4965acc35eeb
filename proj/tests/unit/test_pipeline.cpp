#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "lcg/error.hpp"
#include "lcg/pipeline.hpp"
#include "support/oracles.hpp"

using namespace lcg;
using namespace lcg::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = fs::path(LCG_FIXTURE_DIR) / "synthetic_2000.jsonl";

// First n lines of the fixture, to keep these tests fast.
fs::path small_fixture(const TempDir& dir, std::size_t n) {
  std::ifstream in(kFixture);
  std::string text, line;
  for (std::size_t i = 0; i < n && std::getline(in, line); ++i) text += line + "\n";
  const auto p = dir / "small.jsonl";
  write_text(p, text);
  return p;
}

PipelineConfig small_config(const fs::path& dataset, const fs::path& out) {
  PipelineConfig c;
  c.dataset = dataset;
  c.out_dir = out;
  c.k = 10;
  c.dim = 128;
  c.hidden = 32;
  c.coreset_param = 0.1;
  c.lr = 1e-3;
  c.seed = 5;
  return c;
}

#ifdef LCG_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(LCG_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

const std::vector<std::string_view> kRunArtifacts = {
    artifact::embeddings, artifact::clusters, artifact::assignment, artifact::cluster_report,
    artifact::coreset,    artifact::model,    artifact::scores,     artifact::subset,
    artifact::manifest,   artifact::report};

}  // namespace

TEST_CASE("config text and overrides") {
  PipelineConfig c;
  apply_config_text(c,
                    "# comment\n[pipeline]\ndataset = data.jsonl\nk = 12\ncoreset-mode = distance_percentile\n"
                    "coreset_param = 90\n; another\nclassifier = mnb\ntau=0.5\ninclude_coreset = true\n"
                    "lrs = 1e-3, 1e-4\n");
  CHECK(c.dataset == "data.jsonl");
  CHECK(c.k == 12);
  CHECK(c.coreset_mode == CoresetMode::distance_percentile);
  CHECK(c.coreset_param == 90.0);
  CHECK(c.classifier == ClassifierKind::mnb);
  CHECK(c.tau == 0.5);
  CHECK(c.include_coreset);
  CHECK(c.lrs == std::vector<double>{1e-3, 1e-4});
  set_config_value(c, "k", "7");
  CHECK(c.k == 7);

  CHECK_THROWS_AS(set_config_value(c, "colour", "red"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "k", "many"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "provider", "bert"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(c, "no equals sign here\n"), ConfigError);

  PipelineConfig bad;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad.dataset = "x";
  bad.provider = EmbeddingProvider::lcge;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad.provider = EmbeddingProvider::hashing;
  bad.epochs = 4;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  for (const auto& key : config_keys()) CHECK_FALSE(key.empty());
}

TEST_CASE("run writes every artifact and the subset avoids the coreset") {
  TempDir dir;
  const auto c = small_config(small_fixture(dir, 300), dir / "out");
  const auto s = run_pipeline(c);
  CHECK(s.records == 300);
  CHECK(s.clusters == 10);
  CHECK(s.scored + s.coreset == 300);
  CHECK(s.subset == s.selected);
  for (auto name : kRunArtifacts) CHECK(fs::exists(c.out_dir / name));
  CHECK_FALSE(fs::exists(c.out_dir / artifact::sweep));

  const auto coreset = read_coreset(c.out_dir / artifact::coreset, c.k);
  const auto subset = read_text(c.out_dir / artifact::subset);
  CHECK(std::count(subset.begin(), subset.end(), '\n') == static_cast<long>(s.subset));
  const auto scores = read_scores(c.out_dir / artifact::scores);
  CHECK(scores.size() == s.scored);
  for (const auto& e : coreset.entries)
    for (const auto& r : scores) CHECK(r.id != e.id);
}

TEST_CASE("stages run one by one reproduce the full run") {
  TempDir dir;
  const auto data = small_fixture(dir, 250);
  auto full = small_config(data, dir / "full");
  full.sweep = true;
  full.k = 5;
  run_pipeline(full);

  auto staged = full;
  staged.out_dir = dir / "staged";
  run_embed_stage(staged);
  run_cluster_stage(staged);
  run_coreset_stage(staged);
  run_train_stage(staged);
  run_score_stage(staged);
  run_select_stage(staged);
  run_sweep_stage(staged);
  run_report_stage(staged);

  std::vector<std::string_view> names = kRunArtifacts;
  names.push_back(artifact::sweep);
  for (auto name : names) {
    INFO(name);
    CHECK(read_text(staged.out_dir / name) == read_text(full.out_dir / name));
  }
}

TEST_CASE("thread count does not change any output byte") {
  TempDir dir;
  const auto data = small_fixture(dir, 300);
  auto one = small_config(data, dir / "t1");
  one.threads = 1;
  auto four = one;
  four.out_dir = dir / "t4";
  four.threads = 4;
  run_pipeline(one);
  run_pipeline(four);
  for (auto name : kRunArtifacts) {
    INFO(name);
    CHECK(read_text(one.out_dir / name) == read_text(four.out_dir / name));
  }
}

TEST_CASE("naive Bayes classifier end to end") {
  TempDir dir;
  auto c = small_config(small_fixture(dir, 200), dir / "nb");
  c.classifier = ClassifierKind::mnb;
  c.strategy = SelectionStrategy::per_cluster_topk;
  c.k_per_cluster = 2;
  c.include_coreset = true;
  const auto s = run_pipeline(c);
  CHECK(s.selected <= 2 * c.k);
  CHECK(s.subset == s.selected + s.coreset);
  const auto model = read_text(c.out_dir / artifact::model);
  CHECK(model.substr(0, 4) == "LCGN");
}

TEST_CASE("precomputed embeddings are used when provided") {
  TempDir dir;
  auto c = small_config(small_fixture(dir, 120), dir / "a");
  c.k = 4;
  run_pipeline(c);
  auto with_file = c;
  with_file.out_dir = dir / "b";
  with_file.provider = EmbeddingProvider::lcge;
  with_file.embeddings_path = c.out_dir / artifact::embeddings;
  run_pipeline(with_file);
  CHECK(read_text(with_file.out_dir / artifact::subset) == read_text(c.out_dir / artifact::subset));
}

TEST_CASE("failures name the stage and leave no partial artifacts") {
  TempDir dir;
  auto c = small_config(small_fixture(dir, 100), dir / "fail");
  c.provider = EmbeddingProvider::lcge;
  c.embeddings_path = dir / "missing.lcge";
  try {
    run_pipeline(c);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("stage 'embed'") != std::string::npos);
  }
  for (auto name : kRunArtifacts) CHECK_FALSE(fs::exists(c.out_dir / name));

  auto too_many = small_config(small_fixture(dir, 100), dir / "fail2");
  too_many.k = 500;
  CHECK_THROWS_AS(run_pipeline(too_many), ConfigError);
  CHECK_FALSE(fs::exists(too_many.out_dir / artifact::embeddings));
}

#ifdef LCG_CLI_PATH
TEST_CASE("command line exit codes") {
  TempDir dir;
  const auto data = small_fixture(dir, 150);
  const std::string base = "--dataset " + data.string() + " --k 5 --dim 64 --hidden 16 --quiet";
  CHECK(run_cli("run " + base + " --out_dir " + (dir / "cli").string()) == 0);
  CHECK(fs::exists(dir / "cli" / "subset.jsonl"));
  CHECK(run_cli("report --out_dir " + (dir / "cli").string() + " --quiet") == 0);
  CHECK(run_cli("run " + base + " --epochs 7 --out_dir " + (dir / "x").string()) == 2);
  CHECK(run_cli("run " + base + " --no-such-flag 1") == 2);
  CHECK(run_cli("run " + base + " --provider lcge --embeddings_path " + (dir / "nope.lcge").string() +
                " --out_dir " + (dir / "y").string()) == 3);

  write_text(dir / "cfg.ini", "dataset = " + data.string() + "\nk = 5\ndim = 64\nhidden = 16\nout_dir = " +
                                  (dir / "cfgout").string() + "\n");
  CHECK(run_cli("run -q -c " + (dir / "cfg.ini").string() + " --k 3") == 0);
  const auto clusters = read_text(dir / "cfgout" / "clusters.json");
  CHECK(clusters.find("\"k\": 3") != std::string::npos);
}
#endif
