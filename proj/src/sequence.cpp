#include "vdup/sequence.hpp"

#include "vdup/dense.hpp"
#include "vdup/error.hpp"
#include "vdup/visual_index.hpp"

#include <algorithm>
#include <vector>

namespace vdup {

std::string_view to_string(FrameRepr repr) {
  return repr == FrameRepr::RawVectorCosine ? "raw_vector_cosine" : "per_frame_bovw_cosine";
}

FrameRepr parse_frame_repr(std::string_view text) {
  if (text == "raw_vector_cosine" || text == "raw") return FrameRepr::RawVectorCosine;
  if (text == "per_frame_bovw_cosine" || text == "bovw") return FrameRepr::PerFrameBovwCosine;
  fail(ErrorKind::Validation, "unknown frame representation '" + std::string(text) + "'");
}

std::string_view to_string(WlcsDenominator d) {
  return d == WlcsDenominator::Printed ? "printed" : "end-aligned";
}

WlcsDenominator parse_wlcs_denominator(std::string_view text) {
  if (text == "printed") return WlcsDenominator::Printed;
  if (text == "end-aligned" || text == "end_aligned") return WlcsDenominator::EndAligned;
  fail(ErrorKind::Validation, "unknown w-LCS denominator '" + std::string(text) + "'");
}

void FrameSimConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) fail(ErrorKind::Validation, "tau must lie in [0,1]");
}

double frame_sim(const FeatureVector& a, const FeatureVector& b) {
  if (a.size() != b.size()) fail(ErrorKind::Validation, "frame vectors have different dimensions");
  return std::clamp(cosine_dense(a, b), 0.0, 1.0);
}

double frame_sim(const SparseVector& a, const SparseVector& b) { return cosine(a, b); }

double frame_sim(const FrameRecord& a, const FrameRecord& b, const FrameSimConfig& cfg, const VisualEncoder* encoder) {
  if (a.vectors.empty() || b.vectors.empty()) {
    fail(ErrorKind::Validation, "frame similarity needs feature vectors on both frames");
  }
  if (cfg.frame_repr == FrameRepr::RawVectorCosine) {
    if (a.vectors.size() != 1 || b.vectors.size() != 1) {
      fail(ErrorKind::Validation, "raw vector cosine needs single-vector frames");
    }
    return frame_sim(a.vectors.front(), b.vectors.front());
  }
  if (!encoder) fail(ErrorKind::Validation, "per-frame BoVW similarity needs a codebook and IDF table");
  return frame_sim(encoder->encode_frame(a), encoder->encode_frame(b));
}

Eigen::MatrixXd similarity_matrix(const VideoReport& a, const VideoReport& b, const FrameSimConfig& cfg,
                                  const VisualEncoder* encoder) {
  cfg.validate();
  if (a.frames.empty() || b.frames.empty()) fail(ErrorKind::Validation, "LCS needs nonempty reports");
  if (a.mode != b.mode) {
    fail(ErrorKind::Validation, "reports '" + a.report_id + "' and '" + b.report_id + "' use different feature modes");
  }
  const auto rows = static_cast<Eigen::Index>(a.frames.size());
  const auto cols = static_cast<Eigen::Index>(b.frames.size());
  Eigen::MatrixXd sim(rows, cols);
  if (cfg.frame_repr == FrameRepr::PerFrameBovwCosine) {
    if (!encoder) fail(ErrorKind::Validation, "per-frame BoVW similarity needs a codebook and IDF table");
    std::vector<SparseVector> fb;
    for (const auto& f : b.frames) {
      if (f.vectors.empty()) fail(ErrorKind::Validation, "frame similarity needs feature vectors on both frames");
      fb.push_back(encoder->encode_frame(f));
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto& fa = a.frames[static_cast<std::size_t>(i)];
      if (fa.vectors.empty()) fail(ErrorKind::Validation, "frame similarity needs feature vectors on both frames");
      const SparseVector va = encoder->encode_frame(fa);
      for (Eigen::Index j = 0; j < cols; ++j) sim(i, j) = frame_sim(va, fb[static_cast<std::size_t>(j)]);
    }
    return sim;
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      sim(i, j) = frame_sim(a.frames[static_cast<std::size_t>(i)], b.frames[static_cast<std::size_t>(j)], cfg);
    }
  }
  return sim;
}

namespace {

template <typename Weight>
LcsResult run_lcs(const Eigen::Ref<const Eigen::MatrixXd>& sim, double tau, Weight weight) {
  const Eigen::Index m = sim.rows();
  const Eigen::Index n = sim.cols();
  LcsResult best;
  std::vector<double> prev(static_cast<std::size_t>(n) + 1, 0.0), cur(prev.size(), 0.0);
  std::vector<int> prev_len(prev.size(), 0), cur_len(prev.size(), 0);
  for (Eigen::Index i = 1; i <= m; ++i) {
    for (Eigen::Index j = 1; j <= n; ++j) {
      const double s = sim(i - 1, j - 1);
      if (s >= tau) {
        cur[j] = prev[j - 1] + s * weight(i, j, m, n);
        cur_len[j] = prev_len[j - 1] + 1;
      } else {
        cur[j] = 0.0;
        cur_len[j] = 0;
      }
      if (cur[j] > best.overlap) {
        best.overlap = cur[j];
        best.end_i = static_cast<int>(i - 1);
        best.end_j = static_cast<int>(j - 1);
        best.length = cur_len[j];
      }
    }
    std::swap(prev, cur);
    std::swap(prev_len, cur_len);
  }
  return best;
}

}  // namespace

LcsResult fuzzy_lcs(const Eigen::Ref<const Eigen::MatrixXd>& sim, double tau) {
  return run_lcs(sim, tau, [](Eigen::Index, Eigen::Index, Eigen::Index, Eigen::Index) { return 1.0; });
}

LcsResult weighted_lcs(const Eigen::Ref<const Eigen::MatrixXd>& sim, double tau) {
  return run_lcs(sim, tau, [](Eigen::Index i, Eigen::Index j, Eigen::Index m, Eigen::Index n) {
    return (static_cast<double>(i) / static_cast<double>(m)) * (static_cast<double>(j) / static_cast<double>(n));
  });
}

LcsResult f_lcs(const VideoReport& a, const VideoReport& b, const FrameSimConfig& cfg, const VisualEncoder* encoder) {
  return fuzzy_lcs(similarity_matrix(a, b, cfg, encoder), cfg.tau);
}

LcsResult w_lcs(const VideoReport& a, const VideoReport& b, const FrameSimConfig& cfg, const VisualEncoder* encoder) {
  return weighted_lcs(similarity_matrix(a, b, cfg, encoder), cfg.tau);
}

double normalize_flcs(double overlap, int min_len) {
  if (min_len < 1) fail(ErrorKind::Validation, "f-LCS normalization needs min_len >= 1");
  return std::clamp(overlap / static_cast<double>(min_len), 0.0, 1.0);
}

double wlcs_denominator(int min_len, int max_len, WlcsDenominator kind) {
  if (min_len < 1) fail(ErrorKind::Validation, "w-LCS normalization needs min_len >= 1");
  if (min_len > max_len) fail(ErrorKind::Validation, "w-LCS normalization needs min_len <= max_len");
  const double mn = min_len;
  const double mx = max_len;
  double d = 0.0;
  for (int i = min_len; i >= 1; --i) {
    const double other = kind == WlcsDenominator::Printed ? (mx - i) : (mx - mn + i);
    d += (i / mn) * (other / mx);
  }
  return d;
}

double normalize_wlcs(double overlap, int min_len, int max_len, WlcsDenominator kind) {
  const double d = wlcs_denominator(min_len, max_len, kind);
  if (d == 0.0) return overlap > 0.0 ? 1.0 : 0.0;
  return std::clamp(overlap / d, 0.0, 1.0);
}

double aggregate_visual(double s_bovw, double s_lcs) { return (s_bovw + s_lcs) / 2.0; }

}  // namespace vdup
