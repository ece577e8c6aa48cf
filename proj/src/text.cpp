#include "vdup/text.hpp"

#include "vdup/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace vdup {

using nlohmann::json;

std::string_view to_string(DocStrategy s) {
  switch (s) {
    case DocStrategy::AllText: return "all_text";
    case DocStrategy::UniqueFrames: return "unique_frames";
    case DocStrategy::UniqueWords: return "unique_words";
  }
  return "all_text";
}

DocStrategy parse_doc_strategy(std::string_view text) {
  if (text == "all_text" || text == "all-text") return DocStrategy::AllText;
  if (text == "unique_frames" || text == "unique-frames") return DocStrategy::UniqueFrames;
  if (text == "unique_words" || text == "unique-words") return DocStrategy::UniqueWords;
  fail(ErrorKind::Validation, "unknown document strategy '" + std::string(text) + "'");
}

namespace {

// Words the suffix rules would damage.
const std::unordered_set<std::string>& protected_words() {
  static const std::unordered_set<std::string> words = {
      "setting", "string",  "thing",   "something", "nothing", "anything", "everything", "morning",
      "evening", "building", "ceiling", "during",   "meeting", "wedding",  "king",       "ring",
      "bring",   "spring",  "sing",    "wing",      "bed",     "red",      "need",       "speed",
      "feed",    "seed",    "embed",   "shed",      "bus",     "gas",      "yes",        "this",
      "his",     "was",     "has",     "news",      "series",  "species",  "status",     "plus",
  };
  return words;
}

// Irregular forms.
const std::unordered_map<std::string, std::string>& irregular_forms() {
  static const std::unordered_map<std::string, std::string> forms = {
      {"children", "child"}, {"people", "person"}, {"men", "man"},     {"women", "woman"},
      {"mice", "mouse"},     {"feet", "foot"},     {"teeth", "tooth"}, {"indices", "index"},
      {"went", "go"},        {"gone", "go"},       {"ran", "run"},
  };
  return forms;
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y'; }

bool has_vowel(std::string_view w) { return std::any_of(w.begin(), w.end(), is_vowel); }

// "stopp" -> "stop"; leaves l/s/z doubles ("call", "pass", "buzz") alone.
std::string undouble(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 4 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
  }
  return stem;
}

std::string lemmatize_once(const std::string& w) {
  if (protected_words().count(w)) return w;
  if (auto it = irregular_forms().find(w); it != irregular_forms().end()) return it->second;
  const std::size_t n = w.size();
  if (ends_with(w, "ies") && n >= 5) return w.substr(0, n - 3) + "y";
  if (ends_with(w, "sses")) return w.substr(0, n - 2);
  if (ends_with(w, "es") && n >= 5 &&
      (ends_with(w, "xes") || ends_with(w, "zes") || ends_with(w, "ches") || ends_with(w, "shes"))) {
    return w.substr(0, n - 2);
  }
  if (ends_with(w, "s") && n >= 4 && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is")) {
    return w.substr(0, n - 1);
  }
  if (ends_with(w, "ing") && n >= 6) {
    const std::string stem = w.substr(0, n - 3);
    if (has_vowel(stem)) return undouble(stem);
  }
  if (ends_with(w, "ied") && n >= 5) return w.substr(0, n - 3) + "y";
  if (ends_with(w, "ed") && n >= 5) {
    const std::string stem = w.substr(0, n - 2);
    if (has_vowel(stem) && stem.back() != 'e') return undouble(stem);
  }
  return w;
}

bool is_number(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

std::string lemmatize(std::string_view word) {
  std::string cur(word);
  // Each rule shortens the word or maps it to a protected/irregular form, so
  // this terminates; the bound is a guard only.
  for (int pass = 0; pass < 16; ++pass) {
    std::string next = lemmatize_once(cur);
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

std::vector<std::string> preprocess(std::string_view raw) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    std::string lemma = lemmatize(current);
    current.clear();
    if (lemma.size() < 3 || is_number(lemma)) return;
    tokens.push_back(std::move(lemma));
  };
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::string build_document(const VideoReport& report, DocStrategy strategy) {
  std::string out;
  auto append = [&out](std::string_view piece) {
    if (piece.empty()) return;
    if (!out.empty()) out.push_back(' ');
    out.append(piece);
  };
  switch (strategy) {
    case DocStrategy::AllText:
      for (const auto& f : report.frames) {
        if (f.ocr_text) append(*f.ocr_text);
      }
      break;
    case DocStrategy::UniqueFrames: {
      std::set<std::string> seen;
      for (const auto& f : report.frames) {
        if (!f.ocr_text || f.ocr_text->empty()) continue;
        if (seen.insert(*f.ocr_text).second) append(*f.ocr_text);
      }
      break;
    }
    case DocStrategy::UniqueWords: {
      std::set<std::string> seen;
      for (const auto& f : report.frames) {
        if (!f.ocr_text) continue;
        for (auto& t : preprocess(*f.ocr_text)) {
          if (seen.insert(t).second) append(t);
        }
      }
      break;
    }
  }
  return out;
}

TextDocument make_document(const VideoReport& report, DocStrategy strategy) {
  TextDocument doc;
  doc.report_id = report.report_id;
  doc.raw = build_document(report, strategy);
  doc.tokens = preprocess(doc.raw);
  return doc;
}

double TextIndex::idf(const std::string& term) const {
  auto it = df.find(term);
  const double d = it == df.end() ? 0.0 : static_cast<double>(it->second);
  return 1.0 + std::log(static_cast<double>(doc_count) / (d + 1.0));
}

TextIndex build_text_index(std::span<const TextDocument> docs, DocStrategy strategy) {
  TextIndex index;
  index.strategy = strategy;
  for (const auto& doc : docs) {
    if (doc.tokens.empty()) continue;
    if (!index.doc_len.emplace(doc.report_id, static_cast<std::int64_t>(doc.tokens.size())).second) {
      fail(ErrorKind::Validation, "duplicate document id '" + doc.report_id + "' in text index");
    }
    ++index.doc_count;
    for (const auto& t : std::set<std::string>(doc.tokens.begin(), doc.tokens.end())) ++index.df[t];
  }
  return index;
}

double text_score_raw(const TextDocument& query, const TextDocument& doc, const TextIndex& index) {
  if (doc.tokens.empty() || query.tokens.empty()) return 0.0;
  std::map<std::string, int> tf;
  for (const auto& t : doc.tokens) ++tf[t];
  double score = 0.0;
  for (const auto& t : std::set<std::string>(query.tokens.begin(), query.tokens.end())) {
    auto it = tf.find(t);
    if (it == tf.end()) continue;
    const double idf = index.idf(t);
    score += std::sqrt(static_cast<double>(it->second)) * idf * idf;
  }
  return score / std::sqrt(static_cast<double>(doc.tokens.size()));
}

std::map<std::string, double> min_max_normalize(const std::map<std::string, double>& scores) {
  std::map<std::string, double> out;
  if (scores.empty()) return out;
  double lo = scores.begin()->second;
  double hi = lo;
  for (const auto& [id, s] : scores) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  for (const auto& [id, s] : scores) {
    if (hi == lo) {
      out[id] = hi > 0.0 ? 1.0 : 0.0;
    } else {
      out[id] = (s - lo) / (hi - lo);
    }
  }
  return out;
}

std::map<std::string, double> score_text(const TextDocument& query, const TextIndex& index,
                                         std::span<const TextDocument> corpus_docs) {
  if (index.doc_count == 0) fail(ErrorKind::Validation, "text index is empty");
  std::map<std::string, double> raw;
  for (const auto& doc : corpus_docs) raw[doc.report_id] = text_score_raw(query, doc, index);
  return min_max_normalize(raw);
}

json to_json(const TextIndex& index) {
  return {{"N", index.doc_count},
          {"strategy", std::string(to_string(index.strategy))},
          {"df", index.df},
          {"doc_len", index.doc_len}};
}

TextIndex text_index_from_json(const json& j) {
  try {
    TextIndex index;
    index.doc_count = j.at("N").get<std::int64_t>();
    if (j.contains("strategy")) index.strategy = parse_doc_strategy(j.at("strategy").get<std::string>());
    index.df = j.at("df").get<std::map<std::string, std::int64_t>>();
    index.doc_len = j.at("doc_len").get<std::map<std::string, std::int64_t>>();
    for (const auto& [t, n] : index.df) {
      if (n < 0 || n > index.doc_count) fail(ErrorKind::Parse, "text index: df of '" + t + "' out of range");
    }
    return index;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("text index: ") + e.what());
  }
}

}  // namespace vdup
