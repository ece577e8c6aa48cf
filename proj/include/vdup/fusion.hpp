#pragma once

#include "vdup/text.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vdup {

/// Which visual similarity feeds the fusion.
enum class VisualConfig { BoVW, FLcs, WLcs, BoVWPlusFLcs, BoVWPlusWLcs };

std::string_view to_string(VisualConfig c);  // "BoVW", "f-LCS", "w-LCS", "B+f-LCS", "B+w-LCS"
VisualConfig parse_visual_config(std::string_view text);

enum class FusionMode { Combined, VisualOnly };

std::string_view to_string(FusionMode m);  // "combined", "visual_only"
FusionMode parse_fusion_mode(std::string_view text);

struct FusionConfig {
  double w = 0.2;
  VisualConfig visual = VisualConfig::BoVW;
  bool selective = true;
  double va_threshold = 0.128;

  void validate() const;
};

/// (1 - w) * s_vis + w * s_txt. All inputs must lie in [0,1].
double combine(double s_vis, double s_txt, double w);

/// Dice coefficient over distinct terms; 0 when both sides are empty.
double vocabulary_agreement(const TextDocument& a, const TextDocument& b);

struct ModeSelection {
  double v_dup = 0.0;
  double v_nondup = 0.0;
  FusionMode mode = FusionMode::Combined;
};

/// Combined when |v_dup - v_nondup| > threshold, visual-only otherwise.
ModeSelection decide_mode(double v_dup, double v_nondup, double threshold);

using DocPair = std::pair<const TextDocument*, const TextDocument*>;

/// Averages vocabulary agreement over known duplicate and non-duplicate pairs
/// and applies `decide_mode`. Throws a validation error if a group is empty.
ModeSelection select_mode(std::span<const DocPair> dup_pairs, std::span<const DocPair> nondup_pairs,
                          double threshold);

struct CandidateScores {
  std::string id;
  double s_vis = 0.0;
  double s_txt_raw = 0.0;  // unnormalized textual score
};

struct RankedEntry {
  std::string id;
  double s_vis = 0.0;
  double s_txt = 0.0;
  double s_final = 0.0;
};

struct RankedResult {
  std::string query_id;
  std::vector<RankedEntry> entries;
  FusionMode mode_used = FusionMode::Combined;

  /// 1-based position of `id`, or 0 if absent.
  std::size_t position_of(const std::string& id) const;
};

/// Normalizes textual scores over the candidate set, fuses them with the
/// visual scores under `mode`, and sorts by s_final descending, ties by id.
RankedResult rank_candidates(const std::string& query_id, std::span<const CandidateScores> candidates,
                             const FusionConfig& cfg, FusionMode mode);

nlohmann::json to_json(const RankedResult& result);
RankedResult ranked_result_from_json(const nlohmann::json& j);

}  // namespace vdup
