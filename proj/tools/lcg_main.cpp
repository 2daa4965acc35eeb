// Command-line front end: `lcg run` or one subcommand per pipeline stage.

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <optional>

#include "lcg/error.hpp"
#include "lcg/pipeline.hpp"
#include "lcg/report.hpp"

namespace {

struct Invocation {
  std::string config_file;
  std::map<std::string, std::string> flags;
  bool quiet = false;
};

void add_pipeline_options(CLI::App* sub, Invocation& inv) {
  sub->add_option("-c,--config", inv.config_file, "key=value config file; flags override it");
  sub->add_flag("-q,--quiet", inv.quiet, "suppress stage timing on stderr");
  for (const auto& key : lcg::config_keys()) {
    std::string names = "--" + key;
    std::string dashed = key;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    if (dashed != key) names += ",--" + dashed;
    sub->add_option_function<std::string>(
        names, [&inv, key](const std::string& v) { inv.flags[key] = v; }, "config key '" + key + "'");
  }
}

lcg::PipelineConfig resolve_config(const Invocation& inv) {
  lcg::PipelineConfig config;
  if (!inv.config_file.empty()) lcg::apply_config_file(config, inv.config_file);
  for (const auto& [key, value] : inv.flags) lcg::set_config_value(config, key, value);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-confidence instruction subset selection"};
  app.require_subcommand(1);

  Invocation inv;
  using StageFn = void (*)(const lcg::PipelineConfig&, const lcg::LogFn&);
  const std::vector<std::tuple<std::string, std::string, StageFn>> stages = {
      {"embed", "embed the dataset (hashing or LCGE provider)", &lcg::run_embed_stage},
      {"cluster", "normalize embeddings and fit k-means", &lcg::run_cluster_stage},
      {"coreset", "select centroid-proximal pseudo-labelled samples", &lcg::run_coreset_stage},
      {"train", "train the confidence classifier on the coreset", &lcg::run_train_stage},
      {"score", "score every non-coreset record", &lcg::run_score_stage},
      {"select", "select the low-confidence subset", &lcg::run_select_stage},
      {"report", "write report.json and print the confidence histogram", &lcg::run_report_stage},
      {"sweep", "learning-rate sweep on a stratified coreset split", &lcg::run_sweep_stage},
  };

  CLI::App* run = app.add_subcommand("run", "run the full pipeline");
  add_pipeline_options(run, inv);
  std::vector<std::pair<CLI::App*, StageFn>> stage_cmds;
  for (const auto& [name, help, fn] : stages) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_pipeline_options(sub, inv);
    stage_cmds.emplace_back(sub, fn);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : lcg::exit_code(lcg::ErrorKind::config);
  }

  try {
    const auto config = resolve_config(inv);
    lcg::LogFn log;
    if (!inv.quiet) log = [](std::string_view msg) { std::cerr << "[lcg] " << msg << '\n'; };

    if (run->parsed()) {
      const auto s = lcg::run_pipeline(config, log);
      std::cout << "records=" << s.records << " clusters=" << s.clusters << " kmeans_iterations=" << s.kmeans_iterations
                << " coreset=" << s.coreset << " scored=" << s.scored << " selected=" << s.selected
                << " subset=" << s.subset << '\n';
      return 0;
    }
    for (const auto& [sub, fn] : stage_cmds) {
      if (!sub->parsed()) continue;
      if (sub->get_name() != "report") lcg::validate_config(config);
      fn(config, log);
      if (sub->get_name() == "report") {
        const auto scores = lcg::read_scores(config.out_dir / std::string(lcg::artifact::scores));
        std::cout << lcg::render_histogram(lcg::build_histogram(scores));
      }
      return 0;
    }
  } catch (const lcg::Error& e) {
    std::cerr << "lcg: error: " << e.what() << '\n';
    return lcg::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "lcg: error: " << e.what() << '\n';
    return lcg::exit_code(lcg::ErrorKind::data);
  }
  return 0;
}
