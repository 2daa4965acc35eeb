#include "lcg/naive_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

#include "lcg/binary_io.hpp"
#include "lcg/error.hpp"
#include "lcg/text.hpp"

namespace lcg {

namespace {

constexpr char kNbMagic[4] = {'L', 'C', 'G', 'N'};
constexpr std::uint32_t kNbVersion = 1;

}  // namespace

std::optional<std::size_t> NbModel::column(std::string_view token) const {
  auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), token,
                             [](const std::string& a, std::string_view b) { return std::string_view(a) < b; });
  if (it == vocabulary.end() || *it != token) return std::nullopt;
  return static_cast<std::size_t>(it - vocabulary.begin());
}

NbModel nb_train(const CoreSet& coreset, const Dataset& dataset, std::size_t k, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("nb_train: alpha must be positive");
  if (k < 1) throw ConfigError("nb_train: k must be >= 1");
  if (coreset.entries.empty()) throw DataError("nb_train: coreset is empty");

  std::vector<std::size_t> docs(k, 0);
  std::vector<std::vector<std::string>> tokens_of;
  tokens_of.reserve(coreset.entries.size());
  std::map<std::string, std::size_t, std::less<>> vocab;
  for (const auto& e : coreset.entries) {
    if (e.pseudo_label >= k) throw DataError("nb_train: pseudo label out of range");
    if (e.id >= dataset.size()) throw DataError("nb_train: record id " + std::to_string(e.id) + " out of range");
    ++docs[e.pseudo_label];
    tokens_of.push_back(tokenize(record_text(dataset.records[e.id])));
    for (const auto& t : tokens_of.back()) vocab.emplace(t, 0);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (docs[c] == 0) throw DataError("nb_train: class " + std::to_string(c) + " has no coreset samples");
  }

  NbModel model;
  model.classes = k;
  model.alpha = alpha;
  model.vocabulary.reserve(vocab.size());
  for (auto& [token, col] : vocab) {
    col = model.vocabulary.size();
    model.vocabulary.push_back(token);
  }
  const std::size_t v = model.vocabulary.size();

  std::vector<double> counts(k * v, 0.0);
  std::vector<double> totals(k, 0.0);
  for (std::size_t n = 0; n < coreset.entries.size(); ++n) {
    const auto c = coreset.entries[n].pseudo_label;
    for (const auto& t : tokens_of[n]) {
      counts[c * v + vocab.find(t)->second] += 1.0;
      totals[c] += 1.0;
    }
  }

  const double total_docs = static_cast<double>(coreset.entries.size());
  model.class_log_prior.resize(k);
  model.token_log_likelihood.resize(k * v);
  for (std::size_t c = 0; c < k; ++c) {
    model.class_log_prior[c] = std::log(static_cast<double>(docs[c]) / total_docs);
    const double denom = std::log(totals[c] + alpha * static_cast<double>(v));
    for (std::size_t t = 0; t < v; ++t) {
      model.token_log_likelihood[c * v + t] = std::log(counts[c * v + t] + alpha) - denom;
    }
  }
  return model;
}

ProbabilityVector nb_predict_text(const NbModel& model, std::string_view text) {
  std::vector<double> log_post = model.class_log_prior;
  for (const auto& token : tokenize(text)) {
    const auto col = model.column(token);
    if (!col) continue;
    for (std::size_t c = 0; c < model.classes; ++c) log_post[c] += model.log_likelihood(c, *col);
  }
  const double top = *std::max_element(log_post.begin(), log_post.end());
  double sum = 0.0;
  for (double lp : log_post) sum += std::exp(lp - top);
  const double log_norm = top + std::log(sum);
  ProbabilityVector p(model.classes);
  for (std::size_t c = 0; c < model.classes; ++c) p[c] = std::exp(log_post[c] - log_norm);
  return p;
}

ProbabilityVector nb_predict(const NbModel& model, const InstructionRecord& record) {
  return nb_predict_text(model, record_text(record));
}

void save_nb(const std::filesystem::path& path, const NbModel& model) {
  ByteWriter out;
  out.bytes(std::string_view(kNbMagic, 4));
  out.u32(kNbVersion);
  out.u32(static_cast<std::uint32_t>(model.classes));
  out.u32(static_cast<std::uint32_t>(model.vocabulary.size()));
  out.f64(model.alpha);
  out.f64s(model.class_log_prior);
  for (const auto& t : model.vocabulary) {
    out.u32(static_cast<std::uint32_t>(t.size()));
    out.bytes(t);
  }
  out.f64s(model.token_log_likelihood);
  write_file_bytes(path, out.buffer());
}

NbModel parse_nb(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes, "LCGN");
  if (std::memcmp(in.bytes(4).data(), kNbMagic, 4) != 0) throw DataError("LCGN: bad magic");
  if (in.u32() != kNbVersion) throw DataError("LCGN: unsupported version");
  NbModel m;
  m.classes = in.u32();
  const std::size_t v = in.u32();
  m.alpha = in.f64();
  m.class_log_prior.resize(m.classes);
  for (auto& x : m.class_log_prior) x = in.f64();
  m.vocabulary.reserve(v);
  for (std::size_t i = 0; i < v; ++i) {
    const auto len = in.u32();
    auto b = in.bytes(len);
    m.vocabulary.emplace_back(b.begin(), b.end());
  }
  if (!std::is_sorted(m.vocabulary.begin(), m.vocabulary.end())) throw DataError("LCGN: vocabulary not sorted");
  m.token_log_likelihood.resize(m.classes * v);
  for (auto& x : m.token_log_likelihood) x = in.f64();
  if (in.remaining() != 0) throw DataError("LCGN: trailing bytes");
  return m;
}

NbModel load_nb(const std::filesystem::path& path) { return parse_nb(read_file_bytes(path)); }

}  // namespace lcg
