#pragma once

#include "vdup/fusion.hpp"
#include "vdup/sequence.hpp"
#include "vdup/text.hpp"
#include "vdup/visual_index.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vdup {

struct EngineConfig {
  DocStrategy strategy = DocStrategy::AllText;
  double tau = 0.7;
  /// Unset: raw vectors for single-vector reports, per-frame BoVW otherwise.
  std::optional<FrameRepr> frame_repr;
  WlcsDenominator denominator = WlcsDenominator::Printed;
};

/// Channel values for one (query, candidate) pair.
struct PairScores {
  double bovw = 0.0;
  double flcs = 0.0;  // normalized
  double wlcs = 0.0;  // normalized
  double txt_raw = 0.0;
  LcsResult f;
  LcsResult w;
};

bool needs_lcs(VisualConfig c);
double visual_score(const PairScores& scores, VisualConfig c);

/// Holds one indexed corpus: reports, their TF-IDF BoVW vectors, per-frame
/// vectors and textual documents. Immutable after construction, so scoring
/// calls are safe from several threads.
class SimilarityEngine {
 public:
  /// Builds a text index over `reports` unless one is supplied.
  SimilarityEngine(std::vector<VideoReport> reports, Codebook codebook, IdfTable idf, EngineConfig cfg,
                   std::optional<TextIndex> text_index = std::nullopt);

  bool contains(const std::string& id) const { return slot_.count(id) > 0; }
  const VideoReport& report(const std::string& id) const;
  const TextDocument& document(const std::string& id) const;
  const SparseVector& video_vector(const std::string& id) const;
  const TextIndex& text_index() const { return text_index_; }
  const EngineConfig& config() const { return cfg_; }
  std::vector<std::string> ids() const;

  FrameSimConfig frame_config(const VideoReport& a) const;

  /// Computes every channel; LCS channels only when `with_lcs`.
  PairScores pair_scores(const std::string& query, const std::string& candidate, bool with_lcs) const;

  RankedResult rank(const std::string& query, const std::vector<std::string>& corpus, const FusionConfig& cfg,
                    FusionMode mode) const;

  /// Vocabulary-agreement selector over id pairs.
  ModeSelection select_mode(const std::vector<std::pair<std::string, std::string>>& dup_pairs,
                            const std::vector<std::pair<std::string, std::string>>& nondup_pairs,
                            double threshold) const;

 private:
  struct Entry {
    VideoReport report;
    SparseVector video;
    std::vector<SparseVector> frames;
    TextDocument doc;
  };

  const Entry& entry(const std::string& id) const;

  Codebook codebook_;
  IdfTable idf_;
  EngineConfig cfg_;
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> slot_;
  TextIndex text_index_;
};

}  // namespace vdup
