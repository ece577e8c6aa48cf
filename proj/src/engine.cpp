#include "vdup/engine.hpp"

#include <algorithm>

#include "vdup/error.hpp"

namespace vdup {

bool needs_lcs(VisualConfig c) { return c != VisualConfig::BoVW; }

double visual_score(const PairScores& s, VisualConfig c) {
  switch (c) {
    case VisualConfig::BoVW: return s.bovw;
    case VisualConfig::FLcs: return s.flcs;
    case VisualConfig::WLcs: return s.wlcs;
    case VisualConfig::BoVWPlusFLcs: return aggregate_visual(s.bovw, s.flcs);
    case VisualConfig::BoVWPlusWLcs: return aggregate_visual(s.bovw, s.wlcs);
  }
  return s.bovw;
}

SimilarityEngine::SimilarityEngine(std::vector<VideoReport> reports, Codebook codebook, IdfTable idf,
                                   EngineConfig cfg, std::optional<TextIndex> text_index)
    : codebook_(std::move(codebook)), idf_(std::move(idf)), cfg_(cfg) {
  if (!(cfg_.tau >= 0.0 && cfg_.tau <= 1.0)) fail(ErrorKind::Validation, "tau must lie in [0,1]");
  const VisualEncoder encoder(codebook_, idf_);
  entries_.reserve(reports.size());
  std::vector<TextDocument> docs;
  for (auto& r : reports) {
    if (slot_.count(r.report_id)) fail(ErrorKind::Validation, "duplicate report id '" + r.report_id + "'");
    if (!has_complete_features(r)) {
      fail(ErrorKind::State, "report '" + r.report_id + "' is not indexed: some frames lack feature vectors");
    }
    if (!codebook_.extractor_id.empty() && !r.extractor_id.empty() && r.extractor_id != codebook_.extractor_id) {
      fail(ErrorKind::Validation, "report '" + r.report_id + "' was extracted with '" + r.extractor_id +
                                      "' but the codebook expects '" + codebook_.extractor_id + "'");
    }
    Entry e;
    e.video = encoder.encode_video(r);
    e.frames.reserve(r.frames.size());
    for (const auto& f : r.frames) e.frames.push_back(encoder.encode_frame(f));
    e.doc = make_document(r, cfg_.strategy);
    e.report = std::move(r);
    docs.push_back(e.doc);
    slot_[e.report.report_id] = entries_.size();
    entries_.push_back(std::move(e));
  }
  text_index_ = text_index ? std::move(*text_index) : build_text_index(docs, cfg_.strategy);
}

const SimilarityEngine::Entry& SimilarityEngine::entry(const std::string& id) const {
  auto it = slot_.find(id);
  if (it == slot_.end()) fail(ErrorKind::State, "report '" + id + "' is not indexed");
  return entries_[it->second];
}

const VideoReport& SimilarityEngine::report(const std::string& id) const { return entry(id).report; }
const TextDocument& SimilarityEngine::document(const std::string& id) const { return entry(id).doc; }
const SparseVector& SimilarityEngine::video_vector(const std::string& id) const { return entry(id).video; }

std::vector<std::string> SimilarityEngine::ids() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.report.report_id);
  return out;
}

FrameSimConfig SimilarityEngine::frame_config(const VideoReport& a) const {
  FrameSimConfig fc;
  fc.tau = cfg_.tau;
  fc.frame_repr = cfg_.frame_repr.value_or(a.mode == FeatureMode::Single ? FrameRepr::RawVectorCosine
                                                                         : FrameRepr::PerFrameBovwCosine);
  return fc;
}

PairScores SimilarityEngine::pair_scores(const std::string& query, const std::string& candidate, bool with_lcs) const {
  const Entry& q = entry(query);
  const Entry& c = entry(candidate);
  PairScores s;
  s.bovw = cosine(q.video, c.video);
  s.txt_raw = text_score_raw(q.doc, c.doc, text_index_);
  if (!with_lcs) return s;

  if (q.report.mode != c.report.mode) {
    fail(ErrorKind::Validation, "reports '" + query + "' and '" + candidate + "' use different feature modes");
  }
  const FrameSimConfig fc = frame_config(q.report);
  const auto m = static_cast<Eigen::Index>(q.report.frames.size());
  const auto n = static_cast<Eigen::Index>(c.report.frames.size());
  Eigen::MatrixXd sim(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto ii = static_cast<std::size_t>(i);
      const auto jj = static_cast<std::size_t>(j);
      sim(i, j) = fc.frame_repr == FrameRepr::RawVectorCosine
                      ? frame_sim(q.report.frames[ii], c.report.frames[jj], fc)
                      : frame_sim(q.frames[ii], c.frames[jj]);
    }
  }
  s.f = fuzzy_lcs(sim, fc.tau);
  s.w = weighted_lcs(sim, fc.tau);
  const int lo = static_cast<int>(std::min(m, n));
  const int hi = static_cast<int>(std::max(m, n));
  s.flcs = normalize_flcs(s.f.overlap, lo);
  s.wlcs = normalize_wlcs(s.w.overlap, lo, hi, cfg_.denominator);
  return s;
}

RankedResult SimilarityEngine::rank(const std::string& query, const std::vector<std::string>& corpus,
                                    const FusionConfig& cfg, FusionMode mode) const {
  cfg.validate();
  entry(query);
  std::vector<CandidateScores> candidates;
  candidates.reserve(corpus.size());
  for (const auto& id : corpus) {
    if (id == query) continue;
    const PairScores s = pair_scores(query, id, needs_lcs(cfg.visual));
    candidates.push_back({id, visual_score(s, cfg.visual), s.txt_raw});
  }
  return rank_candidates(query, candidates, cfg, mode);
}

ModeSelection SimilarityEngine::select_mode(const std::vector<std::pair<std::string, std::string>>& dup_pairs,
                                            const std::vector<std::pair<std::string, std::string>>& nondup_pairs,
                                            double threshold) const {
  auto to_docs = [this](const auto& pairs) {
    std::vector<DocPair> out;
    for (const auto& [a, b] : pairs) out.emplace_back(&document(a), &document(b));
    return out;
  };
  const auto dups = to_docs(dup_pairs);
  const auto nondups = to_docs(nondup_pairs);
  return vdup::select_mode(dups, nondups, threshold);
}

}  // namespace vdup
