#pragma once

#include "vdup/sparse.hpp"
#include "vdup/types.hpp"

#include <Eigen/Core>

#include <string_view>

namespace vdup {

class VisualEncoder;

/// How two frames are compared inside the fuzzy LCS.
enum class FrameRepr {
  RawVectorCosine,     // cosine of the single per-frame vectors
  PerFrameBovwCosine,  // cosine of per-frame TF-IDF bag-of-visual-words vectors
};

/// Denominator used to normalize weighted LCS overlap.
enum class WlcsDenominator {
  Printed,     // sum_{i=1..min} (i/min) * ((max-i)/max)
  EndAligned,  // shorter video aligned to the end of the longer one
};

std::string_view to_string(FrameRepr repr);
FrameRepr parse_frame_repr(std::string_view text);
std::string_view to_string(WlcsDenominator d);
WlcsDenominator parse_wlcs_denominator(std::string_view text);

struct FrameSimConfig {
  double tau = 0.7;
  FrameRepr frame_repr = FrameRepr::RawVectorCosine;

  void validate() const;
};

struct LcsResult {
  double overlap = 0.0;
  int end_i = -1;  // 0-based position in A where the best run ends, -1 if none
  int end_j = -1;
  int length = 0;
};

/// Cosine clamped to [0,1].
double frame_sim(const FeatureVector& a, const FeatureVector& b);
double frame_sim(const SparseVector& a, const SparseVector& b);

/// Frame similarity under `cfg`. Per-frame BoVW needs an encoder.
double frame_sim(const FrameRecord& a, const FrameRecord& b, const FrameSimConfig& cfg,
                 const VisualEncoder* encoder = nullptr);

/// |A| x |B| matrix of frame similarities.
Eigen::MatrixXd similarity_matrix(const VideoReport& a, const VideoReport& b, const FrameSimConfig& cfg,
                                  const VisualEncoder* encoder = nullptr);

/// Fuzzy longest common substring over a precomputed similarity matrix:
/// cell(i,j) = cell(i-1,j-1) + s(i,j) when s(i,j) >= tau, else 0.
/// The best cell is the earliest maximum in row-major order.
LcsResult fuzzy_lcs(const Eigen::Ref<const Eigen::MatrixXd>& sim, double tau);

/// Same recurrence with increments s(i,j) * (i/m) * (j/n), positions 1-based,
/// m = rows, n = cols, so matches late in both videos count more.
LcsResult weighted_lcs(const Eigen::Ref<const Eigen::MatrixXd>& sim, double tau);

LcsResult f_lcs(const VideoReport& a, const VideoReport& b, const FrameSimConfig& cfg,
                const VisualEncoder* encoder = nullptr);
LcsResult w_lcs(const VideoReport& a, const VideoReport& b, const FrameSimConfig& cfg,
                const VisualEncoder* encoder = nullptr);

/// overlap / min_len, clamped to [0,1].
double normalize_flcs(double overlap, int min_len);

double wlcs_denominator(int min_len, int max_len, WlcsDenominator kind = WlcsDenominator::Printed);

/// overlap / denominator clamped to [0,1]. A zero denominator (min = max = 1
/// with the printed form) yields 1 for positive overlap and 0 otherwise.
double normalize_wlcs(double overlap, int min_len, int max_len,
                      WlcsDenominator kind = WlcsDenominator::Printed);

/// Mean of the unordered and ordered visual scores.
double aggregate_visual(double s_bovw, double s_lcs);

}  // namespace vdup
