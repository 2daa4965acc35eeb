#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcg/activations.hpp"
#include "lcg/coreset.hpp"
#include "lcg/corpus.hpp"

namespace lcg {

/// Multinomial Naive Bayes over token counts with additive smoothing.
struct NbModel {
  std::size_t classes = 0;
  double alpha = 1.0;
  std::vector<double> class_log_prior;       // classes
  std::vector<std::string> vocabulary;       // sorted; index is the column
  std::vector<double> token_log_likelihood;  // classes x vocabulary.size(), row-major

  std::size_t vocabulary_size() const noexcept { return vocabulary.size(); }
  std::optional<std::size_t> column(std::string_view token) const;
  double log_likelihood(std::size_t cls, std::size_t col) const {
    return token_log_likelihood[cls * vocabulary.size() + col];
  }
};

/// Vocabulary is every token in the coreset texts (instruction + " " + input).
/// likelihood(k, t) = (count(k, t) + alpha) / (total(k) + alpha * V).
NbModel nb_train(const CoreSet& coreset, const Dataset& dataset, std::size_t k, double alpha = 1.0);

/// Posterior over classes; tokens outside the vocabulary are skipped.
ProbabilityVector nb_predict(const NbModel& model, const InstructionRecord& record);
ProbabilityVector nb_predict_text(const NbModel& model, std::string_view text);

/// "LCGN" binary file. Parameters are stored as f64 so a reloaded model
/// scores bit-identically to the in-memory one.
void save_nb(const std::filesystem::path& path, const NbModel& model);
NbModel load_nb(const std::filesystem::path& path);
NbModel parse_nb(std::span<const std::uint8_t> bytes);

}  // namespace lcg
