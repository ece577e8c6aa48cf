#pragma once

#include "vdup/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vdup {

enum class DocStrategy { AllText, UniqueFrames, UniqueWords };

std::string_view to_string(DocStrategy s);
DocStrategy parse_doc_strategy(std::string_view text);

/// Suffix-rule lemmatizer applied until it reaches a fixed point.
std::string lemmatize(std::string_view word);

/// Lowercase, split on non-alphanumerics, lemmatize, drop pure numbers and
/// terms shorter than three characters.
std::vector<std::string> preprocess(std::string_view raw);

/// Raw textual document of a report under one composition strategy.
std::string build_document(const VideoReport& report, DocStrategy strategy);

struct TextDocument {
  std::string report_id;
  std::string raw;
  std::vector<std::string> tokens;
};

TextDocument make_document(const VideoReport& report, DocStrategy strategy);

/// Corpus statistics for TF-IDF scoring. Documents without tokens are not
/// indexed.
struct TextIndex {
  std::int64_t doc_count = 0;
  std::map<std::string, std::int64_t> df;
  std::map<std::string, std::int64_t> doc_len;
  DocStrategy strategy = DocStrategy::AllText;

  /// 1 + ln(N / (df + 1))
  double idf(const std::string& term) const;

  bool operator==(const TextIndex&) const = default;
};

TextIndex build_text_index(std::span<const TextDocument> docs, DocStrategy strategy = DocStrategy::AllText);

/// sum over distinct shared terms of sqrt(tf(t,d)) * idf(t)^2 / sqrt(|d|).
double text_score_raw(const TextDocument& query, const TextDocument& doc, const TextIndex& index);

/// Min-max rescaling to [0,1]. When all scores are equal the result is 1 for a
/// positive common score and 0 otherwise.
std::map<std::string, double> min_max_normalize(const std::map<std::string, double>& scores);

/// Normalized textual similarity of `query` to every corpus document.
std::map<std::string, double> score_text(const TextDocument& query, const TextIndex& index,
                                         std::span<const TextDocument> corpus_docs);

nlohmann::json to_json(const TextIndex& index);
TextIndex text_index_from_json(const nlohmann::json& j);

}  // namespace vdup
