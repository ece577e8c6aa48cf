#include "vdup/visual_index.hpp"

#include "vdup/dense.hpp"
#include "vdup/error.hpp"
#include "vdup/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace vdup {

using nlohmann::json;

Codebook train_codebook(std::span<const FeatureVector> features, const CodebookTrainingOptions& options,
                        std::vector<double>* inertia_history) {
  if (features.empty() || static_cast<Eigen::Index>(features.size()) < options.k) {
    fail(ErrorKind::InsufficientData, "codebook training needs at least k=" + std::to_string(options.k) +
                                          " feature vectors, got " + std::to_string(features.size()));
  }
  const Eigen::Index dim = features.front().size();
  Eigen::MatrixXd points(dim, static_cast<Eigen::Index>(features.size()));
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != dim) fail(ErrorKind::Validation, "codebook training: mixed feature dimensions");
    if (!features[i].allFinite()) fail(ErrorKind::Validation, "codebook training: non-finite feature value");
    points.col(static_cast<Eigen::Index>(i)) = features[i];
  }
  auto result = kmeans<double>(points, options.k, options.seed, options.max_iters, options.tol);
  if (inertia_history) *inertia_history = result.inertia_history;
  Codebook cb;
  cb.centroids = std::move(result.centroids);
  cb.extractor_id = options.extractor_id;
  cb.seed = options.seed;
  return cb;
}

std::vector<FeatureVector> sample_features(std::span<const FeatureVector> features, std::size_t count,
                                           std::uint64_t seed) {
  if (count == 0 || count >= features.size()) return {features.begin(), features.end()};
  // Partial Fisher-Yates over indices, then restore input order.
  std::vector<std::size_t> idx(features.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(detail::unit_draw(rng) * static_cast<double>(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  std::vector<FeatureVector> out;
  out.reserve(count);
  for (std::size_t i : idx) out.push_back(features[i]);
  return out;
}

std::vector<TermId> assign_words(std::span<const FeatureVector> vectors, const Codebook& codebook) {
  std::vector<TermId> words;
  words.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (v.size() != codebook.dim()) {
      fail(ErrorKind::Validation, "vector dimension " + std::to_string(v.size()) + " does not match codebook dimension " +
                                      std::to_string(codebook.dim()));
    }
    words.push_back(static_cast<TermId>(nearest_centroid(v, codebook.centroids)));
  }
  return words;
}

SparseVector build_tf(std::span<const TermId> words) {
  if (words.empty()) fail(ErrorKind::EmptyVideo, "cannot build term frequencies of an empty word list");
  SparseVector tf;
  for (TermId w : words) tf.add(w, 1.0);
  return tf;
}

double IdfTable::idf(TermId word) const {
  auto it = df.find(word);
  const double d = it == df.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((static_cast<double>(doc_count) + 1.0) / (d + 1.0)) + 1.0;
}

IdfTable build_idf(std::span<const std::vector<TermId>> reference_docs) {
  if (reference_docs.empty()) fail(ErrorKind::Validation, "IDF reference corpus is empty");
  IdfTable t;
  t.doc_count = static_cast<std::int64_t>(reference_docs.size());
  for (const auto& doc : reference_docs) {
    std::set<TermId> seen(doc.begin(), doc.end());
    for (TermId w : seen) ++t.df[w];
  }
  return t;
}

SparseVector encode_tfidf(const SparseVector& tf, const IdfTable& idf) {
  SparseVector out;
  for (const auto& [w, count] : tf.entries()) out.set(w, count * idf.idf(w));
  return out;
}

std::vector<TermId> VisualEncoder::video_words(const VideoReport& report) const {
  std::vector<TermId> words;
  for (const auto& frame : report.frames) {
    auto fw = assign_words(frame.vectors, *codebook_);
    words.insert(words.end(), fw.begin(), fw.end());
  }
  return words;
}

SparseVector VisualEncoder::encode_video(const VideoReport& report) const {
  const auto words = video_words(report);
  if (words.empty()) fail(ErrorKind::EmptyVideo, "report '" + report.report_id + "' has no feature vectors");
  return encode_tfidf(build_tf(words), *idf_);
}

SparseVector VisualEncoder::encode_frame(const FrameRecord& frame) const {
  if (frame.vectors.empty()) return {};
  const auto words = assign_words(frame.vectors, *codebook_);
  return encode_tfidf(build_tf(words), *idf_);
}

json to_json(const Codebook& cb) {
  json centroids = json::array();
  for (Eigen::Index c = 0; c < cb.k(); ++c) {
    json row = json::array();
    for (Eigen::Index d = 0; d < cb.dim(); ++d) row.push_back(cb.centroids(d, c));
    centroids.push_back(std::move(row));
  }
  return {{"k", cb.k()},
          {"dim", cb.dim()},
          {"seed", cb.seed},
          {"extractor_id", cb.extractor_id},
          {"centroids", std::move(centroids)}};
}

Codebook codebook_from_json(const json& j) {
  try {
    Codebook cb;
    const auto k = j.at("k").get<Eigen::Index>();
    const auto dim = j.at("dim").get<Eigen::Index>();
    cb.seed = j.at("seed").get<std::uint64_t>();
    cb.extractor_id = j.at("extractor_id").get<std::string>();
    const json& rows = j.at("centroids");
    if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != k || k < 1) {
      fail(ErrorKind::Parse, "codebook: 'centroids' must hold k rows");
    }
    cb.centroids.resize(dim, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      const json& row = rows[static_cast<std::size_t>(c)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
        fail(ErrorKind::Parse, "codebook: centroid " + std::to_string(c) + " does not have dim entries");
      }
      for (Eigen::Index d = 0; d < dim; ++d) cb.centroids(d, c) = row[static_cast<std::size_t>(d)].get<double>();
    }
    if (!cb.centroids.allFinite()) fail(ErrorKind::Parse, "codebook: non-finite centroid value");
    return cb;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("codebook: ") + e.what());
  }
}

json to_json(const IdfTable& idf) {
  json df = json::object();
  for (const auto& [w, n] : idf.df) df[std::to_string(w)] = n;
  return {{"N", idf.doc_count}, {"df", std::move(df)}};
}

IdfTable idf_from_json(const json& j) {
  try {
    IdfTable t;
    t.doc_count = j.at("N").get<std::int64_t>();
    if (t.doc_count < 1) fail(ErrorKind::Parse, "idf: N must be positive");
    for (const auto& [key, value] : j.at("df").items()) {
      const auto n = value.get<std::int64_t>();
      if (n < 0 || n > t.doc_count) fail(ErrorKind::Parse, "idf: df of word " + key + " out of range");
      t.df[std::stoll(key)] = n;
    }
    return t;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("idf: ") + e.what());
  } catch (const std::invalid_argument&) {
    fail(ErrorKind::Parse, "idf: word ids must be integers");
  }
}

}  // namespace vdup
