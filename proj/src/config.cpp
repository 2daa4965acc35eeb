#include "lcg/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "lcg/error.hpp"
#include "lcg/mlp.hpp"

namespace lcg {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "' as " +
                    std::string(expected));
}

template <typename T>
T parse_unsigned(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "a non-negative integer");
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  // std::from_chars for double is unavailable in older libstdc++.
  const std::string s(value);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    bad_value(key, value, "a number");
  }
  if (used != s.size()) bad_value(key, value, "a number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  std::string v(value);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, value, "a boolean");
}

std::string normalize_key(std::string_view key) {
  std::string k(trim(key));
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "dataset", "format",  "provider",      "embeddings_path", "dim",   "k",     "seed",
      "max_iter", "tol",    "coreset_mode",  "coreset_param",   "classifier", "lr", "epochs",
      "batch",   "hidden",  "alpha",         "strategy",        "tau",   "k_per_cluster",
      "include_coreset", "sweep", "lrs",     "out_dir",         "threads"};
  return keys;
}

void set_config_value(PipelineConfig& c, std::string_view raw_key, std::string_view raw_value) {
  const std::string key = normalize_key(raw_key);
  const std::string_view value = trim(raw_value);

  if (key == "dataset") {
    c.dataset = std::string(value);
  } else if (key == "format") {
    c.format = parse_dataset_format(value);
  } else if (key == "provider") {
    if (value == "hashing") c.provider = EmbeddingProvider::hashing;
    else if (value == "lcge") c.provider = EmbeddingProvider::lcge;
    else bad_value(key, value, "'hashing' or 'lcge'");
  } else if (key == "embeddings_path") {
    c.embeddings_path = std::string(value);
  } else if (key == "dim") {
    c.dim = parse_unsigned<std::size_t>(key, value);
  } else if (key == "k") {
    c.k = parse_unsigned<std::size_t>(key, value);
  } else if (key == "seed") {
    c.seed = parse_unsigned<std::uint64_t>(key, value);
  } else if (key == "max_iter") {
    c.max_iter = parse_unsigned<std::size_t>(key, value);
  } else if (key == "tol") {
    c.tol = parse_double(key, value);
  } else if (key == "coreset_mode") {
    c.coreset_mode = parse_coreset_mode(value);
  } else if (key == "coreset_param") {
    c.coreset_param = parse_double(key, value);
  } else if (key == "classifier") {
    if (value == "mlp") c.classifier = ClassifierKind::mlp;
    else if (value == "mnb" || value == "nb") c.classifier = ClassifierKind::mnb;
    else bad_value(key, value, "'mlp' or 'mnb'");
  } else if (key == "lr") {
    c.lr = parse_double(key, value);
  } else if (key == "epochs") {
    c.epochs = static_cast<int>(parse_unsigned<unsigned>(key, value));
  } else if (key == "batch") {
    c.batch = parse_unsigned<std::size_t>(key, value);
  } else if (key == "hidden") {
    c.hidden = parse_unsigned<std::size_t>(key, value);
  } else if (key == "alpha") {
    c.alpha = parse_double(key, value);
  } else if (key == "strategy") {
    c.strategy = parse_selection_strategy(value);
  } else if (key == "tau") {
    c.tau = parse_double(key, value);
  } else if (key == "k_per_cluster") {
    c.k_per_cluster = parse_unsigned<std::size_t>(key, value);
  } else if (key == "include_coreset") {
    c.include_coreset = parse_bool(key, value);
  } else if (key == "sweep") {
    c.sweep = parse_bool(key, value);
  } else if (key == "lrs") {
    c.lrs.clear();
    std::string_view rest = value;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      if (!item.empty()) c.lrs.push_back(parse_double(key, item));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  } else if (key == "out_dir") {
    c.out_dir = std::string(value);
  } else if (key == "threads") {
    c.threads = parse_unsigned<unsigned>(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void apply_config_text(PipelineConfig& config, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto s = trim(line);
    if (s.empty() || s.front() == '#' || s.front() == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set_config_value(config, s.substr(0, eq), s.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(PipelineConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(config, buf.str());
}

void validate_config(const PipelineConfig& c) {
  if (c.dataset.empty()) throw ConfigError("no dataset given");
  if (c.provider == EmbeddingProvider::lcge && c.embeddings_path.empty()) {
    throw ConfigError("provider=lcge requires embeddings_path");
  }
  if (c.dim < 2) throw ConfigError("dim must be >= 2");
  if (c.k < 1) throw ConfigError("k must be >= 1");
  if (c.max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(c.tol >= 0.0)) throw ConfigError("tol must be non-negative");
  if (c.epochs < 1 || c.epochs > kMaxEpochs) {
    throw ConfigError("epochs must be in 1.." + std::to_string(kMaxEpochs));
  }
  if (!(c.lr > 0.0)) throw ConfigError("lr must be positive");
  if (c.batch < 1) throw ConfigError("batch must be >= 1");
  if (c.hidden < 1) throw ConfigError("hidden must be >= 1");
  if (!(c.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (c.strategy == SelectionStrategy::global_threshold && !(c.tau > 0.0 && c.tau <= 1.0)) {
    throw ConfigError("tau must be in (0, 1]");
  }
  if (c.strategy == SelectionStrategy::per_cluster_topk && c.k_per_cluster < 1) {
    throw ConfigError("k_per_cluster must be >= 1");
  }
  if (c.lrs.empty()) throw ConfigError("lrs must list at least one learning rate");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  if (c.out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

std::string_view to_string(EmbeddingProvider provider) noexcept {
  return provider == EmbeddingProvider::hashing ? "hashing" : "lcge";
}

std::string_view to_string(ClassifierKind kind) noexcept {
  return kind == ClassifierKind::mlp ? "mlp" : "mnb";
}

}  // namespace lcg
