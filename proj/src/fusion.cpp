#include "vdup/fusion.hpp"

#include "vdup/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace vdup {

using nlohmann::json;

std::string_view to_string(VisualConfig c) {
  switch (c) {
    case VisualConfig::BoVW: return "BoVW";
    case VisualConfig::FLcs: return "f-LCS";
    case VisualConfig::WLcs: return "w-LCS";
    case VisualConfig::BoVWPlusFLcs: return "B+f-LCS";
    case VisualConfig::BoVWPlusWLcs: return "B+w-LCS";
  }
  return "BoVW";
}

VisualConfig parse_visual_config(std::string_view text) {
  if (text == "BoVW" || text == "bovw") return VisualConfig::BoVW;
  if (text == "f-LCS" || text == "flcs") return VisualConfig::FLcs;
  if (text == "w-LCS" || text == "wlcs") return VisualConfig::WLcs;
  if (text == "B+f-LCS" || text == "b+flcs") return VisualConfig::BoVWPlusFLcs;
  if (text == "B+w-LCS" || text == "b+wlcs") return VisualConfig::BoVWPlusWLcs;
  fail(ErrorKind::Validation, "unknown visual configuration '" + std::string(text) + "'");
}

std::string_view to_string(FusionMode m) { return m == FusionMode::Combined ? "combined" : "visual_only"; }

FusionMode parse_fusion_mode(std::string_view text) {
  if (text == "combined") return FusionMode::Combined;
  if (text == "visual_only") return FusionMode::VisualOnly;
  fail(ErrorKind::Parse, "unknown fusion mode '" + std::string(text) + "'");
}

void FusionConfig::validate() const {
  if (!(w >= 0.0 && w <= 1.0)) fail(ErrorKind::Validation, "fusion weight w must lie in [0,1]");
  if (!(va_threshold >= 0.0 && va_threshold <= 1.0)) {
    fail(ErrorKind::Validation, "vocabulary agreement threshold must lie in [0,1]");
  }
}

double combine(double s_vis, double s_txt, double w) {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(s_vis) || !in_unit(s_txt) || !in_unit(w)) {
    fail(ErrorKind::Validation, "combine: inputs must lie in [0,1]");
  }
  return (1.0 - w) * s_vis + w * s_txt;
}

double vocabulary_agreement(const TextDocument& a, const TextDocument& b) {
  const std::set<std::string> va(a.tokens.begin(), a.tokens.end());
  const std::set<std::string> vb(b.tokens.begin(), b.tokens.end());
  if (va.empty() && vb.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& t : va) shared += vb.count(t);
  return 2.0 * static_cast<double>(shared) / static_cast<double>(va.size() + vb.size());
}

ModeSelection decide_mode(double v_dup, double v_nondup, double threshold) {
  ModeSelection sel;
  sel.v_dup = v_dup;
  sel.v_nondup = v_nondup;
  sel.mode = std::abs(v_dup - v_nondup) > threshold ? FusionMode::Combined : FusionMode::VisualOnly;
  return sel;
}

namespace {

double mean_agreement(std::span<const DocPair> pairs) {
  // Sorted before summing so the mean does not depend on pair order.
  std::vector<double> values;
  values.reserve(pairs.size());
  for (const auto& [a, b] : pairs) values.push_back(vocabulary_agreement(*a, *b));
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

ModeSelection select_mode(std::span<const DocPair> dup_pairs, std::span<const DocPair> nondup_pairs,
                          double threshold) {
  if (dup_pairs.empty() || nondup_pairs.empty()) {
    fail(ErrorKind::Validation, "mode selection needs at least one duplicate and one non-duplicate pair");
  }
  return decide_mode(mean_agreement(dup_pairs), mean_agreement(nondup_pairs), threshold);
}

std::size_t RankedResult::position_of(const std::string& id) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].id == id) return i + 1;
  }
  return 0;
}

RankedResult rank_candidates(const std::string& query_id, std::span<const CandidateScores> candidates,
                             const FusionConfig& cfg, FusionMode mode) {
  cfg.validate();
  std::map<std::string, double> raw;
  for (const auto& c : candidates) {
    if (!raw.emplace(c.id, c.s_txt_raw).second) fail(ErrorKind::Validation, "duplicate candidate '" + c.id + "'");
  }
  const auto s_txt = min_max_normalize(raw);

  RankedResult result;
  result.query_id = query_id;
  result.mode_used = mode;
  result.entries.reserve(candidates.size());
  for (const auto& c : candidates) {
    RankedEntry e;
    e.id = c.id;
    e.s_vis = std::clamp(c.s_vis, 0.0, 1.0);
    e.s_txt = s_txt.at(c.id);
    e.s_final = mode == FusionMode::Combined ? combine(e.s_vis, e.s_txt, cfg.w) : e.s_vis;
    result.entries.push_back(std::move(e));
  }
  std::sort(result.entries.begin(), result.entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.s_final != b.s_final) return a.s_final > b.s_final;
    return a.id < b.id;
  });
  return result;
}

json to_json(const RankedResult& result) {
  json entries = json::array();
  for (const auto& e : result.entries) {
    entries.push_back({{"id", e.id}, {"s_vis", e.s_vis}, {"s_txt", e.s_txt}, {"s_final", e.s_final}});
  }
  return {{"query", result.query_id},
          {"mode_used", std::string(to_string(result.mode_used))},
          {"entries", std::move(entries)}};
}

RankedResult ranked_result_from_json(const json& j) {
  try {
    RankedResult r;
    r.query_id = j.at("query").get<std::string>();
    r.mode_used = parse_fusion_mode(j.at("mode_used").get<std::string>());
    for (const auto& e : j.at("entries")) {
      r.entries.push_back({e.at("id").get<std::string>(), e.at("s_vis").get<double>(), e.at("s_txt").get<double>(),
                           e.at("s_final").get<double>()});
    }
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("result: ") + e.what());
  }
}

}  // namespace vdup
