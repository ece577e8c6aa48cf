#pragma once

#include "vdup/sparse.hpp"
#include "vdup/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace vdup {

/// k visual words, one centroid per column.
struct Codebook {
  Eigen::MatrixXd centroids;  // dim x k
  std::string extractor_id;
  std::uint64_t seed = 0;

  Eigen::Index k() const { return centroids.cols(); }
  Eigen::Index dim() const { return centroids.rows(); }

  bool operator==(const Codebook& other) const {
    return centroids == other.centroids && extractor_id == other.extractor_id && seed == other.seed;
  }
};

struct CodebookTrainingOptions {
  Eigen::Index k = 1000;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-4;
  std::string extractor_id;
};

/// Clusters `features` with seeded k-means++ / Lloyd iterations.
/// Throws InsufficientData when there are fewer vectors than k.
Codebook train_codebook(std::span<const FeatureVector> features, const CodebookTrainingOptions& options,
                        std::vector<double>* inertia_history = nullptr);

/// Seeded subsample without replacement, preserving the input order.
std::vector<FeatureVector> sample_features(std::span<const FeatureVector> features, std::size_t count,
                                           std::uint64_t seed);

/// Nearest-centroid word id per vector (Euclidean, ties to the lowest id).
std::vector<TermId> assign_words(std::span<const FeatureVector> vectors, const Codebook& codebook);

/// Raw occurrence counts. Throws EmptyVideo on an empty list.
SparseVector build_tf(std::span<const TermId> words);

struct IdfTable {
  std::int64_t doc_count = 0;
  std::map<TermId, std::int64_t> df;

  /// ln((N+1)/(df+1)) + 1: finite for unseen words and never below 1.
  double idf(TermId word) const;

  bool operator==(const IdfTable&) const = default;
};

/// One document per entry; df counts documents containing a word at least once.
IdfTable build_idf(std::span<const std::vector<TermId>> reference_docs);

SparseVector encode_tfidf(const SparseVector& tf, const IdfTable& idf);

nlohmann::json to_json(const Codebook& codebook);
Codebook codebook_from_json(const nlohmann::json& j);
nlohmann::json to_json(const IdfTable& idf);
IdfTable idf_from_json(const nlohmann::json& j);

}  // namespace vdup

namespace vdup {

/// Maps frames and videos to TF-IDF bag-of-visual-words vectors under one
/// codebook and IDF table. Both are borrowed and must outlive the encoder.
class VisualEncoder {
 public:
  VisualEncoder(const Codebook& codebook, const IdfTable& idf) : codebook_(&codebook), idf_(&idf) {}

  /// Words of every descriptor of every frame, in frame order.
  std::vector<TermId> video_words(const VideoReport& report) const;
  SparseVector encode_video(const VideoReport& report) const;
  /// Per-frame TF-IDF vector built from that frame's descriptor words only.
  SparseVector encode_frame(const FrameRecord& frame) const;

  const Codebook& codebook() const { return *codebook_; }
  const IdfTable& idf() const { return *idf_; }

 private:
  const Codebook* codebook_;
  const IdfTable* idf_;
};

}  // namespace vdup
