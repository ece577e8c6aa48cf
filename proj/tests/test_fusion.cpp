#include "support.hpp"

#include "vdup/engine.hpp"
#include "vdup/error.hpp"
#include "vdup/fusion.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace vdup;

namespace {

TextDocument doc(const std::string& id, const std::string& text) {
  return make_document(test::text_report(id, {text}), DocStrategy::AllText);
}

std::vector<std::string> order(const RankedResult& r) {
  std::vector<std::string> ids;
  for (const auto& e : r.entries) ids.push_back(e.id);
  return ids;
}

// 24 random unit "screens" in 48-d, nearly orthogonal; a report is a list of screen numbers.
struct ScreenWorld {
  std::vector<FeatureVector> screens;
  Codebook codebook;
  IdfTable idf;

  ScreenWorld() {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g;
    codebook.centroids.resize(48, 24);
    codebook.extractor_id = "test";
    for (int s = 0; s < 24; ++s) {
      FeatureVector v(48);
      for (auto& x : v) x = g(rng);
      v.normalize();
      screens.push_back(v);
      codebook.centroids.col(s) = v;
    }
    idf.doc_count = 24;
    for (int s = 0; s < 24; ++s) idf.df[s] = 1;
  }

  VideoReport report(const std::string& id, const std::vector<int>& seq, const std::string& text) const {
    std::vector<FeatureVector> frames;
    for (int s : seq) frames.push_back(screens[s]);
    auto r = test::single_report(id, frames);
    for (auto& f : r.frames) f.ocr_text = text;
    return r;
  }
};

}  // namespace

TEST_CASE("linear fusion") {
  CHECK(combine(0.5, 1.0, 0.2) == doctest::Approx(0.6));
  for (double s : {0.0, 0.3, 1.0}) {
    CHECK(combine(0.42, s, 0.0) == 0.42);
    CHECK(combine(s, 0.77, 1.0) == 0.77);
  }
  CHECK_THROWS_AS(combine(1.2, 0.5, 0.2), Error);
  CHECK_THROWS_AS(combine(0.5, 0.5, -0.1), Error);
  CHECK(combine(0.6, 0.4, 0.3) >= combine(0.5, 0.4, 0.3));
}

TEST_CASE("vocabulary agreement is Dice over distinct terms") {
  CHECK(vocabulary_agreement(doc("a", "login error"), doc("b", "error login login")) == 1.0);
  CHECK(vocabulary_agreement(doc("a", "login error"), doc("b", "settings page")) == 0.0);
  CHECK(vocabulary_agreement(doc("a", "aaa bbb ccc"), doc("b", "bbb ccc ddd")) ==
        doctest::Approx(2.0 * 2 / 6).epsilon(1e-12));
  CHECK(vocabulary_agreement(doc("a", ""), doc("b", "")) == 0.0);
}

TEST_CASE("mode decision from agreement gaps") {
  CHECK(decide_mode(0.708, 0.379, 0.128).mode == FusionMode::Combined);
  CHECK(decide_mode(0.860, 0.863, 0.128).mode == FusionMode::VisualOnly);
  CHECK(decide_mode(0.696, 0.610, 0.128).mode == FusionMode::VisualOnly);
  CHECK(decide_mode(0.2, 0.5, 0.128).mode == FusionMode::Combined);
}

TEST_CASE("selector averages pair agreement and ignores pair order") {
  const auto a1 = doc("a1", "login error crash"), a2 = doc("a2", "login error crash");
  const auto b1 = doc("b1", "settings page theme"), b2 = doc("b2", "login page theme");
  std::vector<DocPair> dups{{&a1, &a2}};
  std::vector<DocPair> nondups{{&a1, &b1}, {&a2, &b2}};
  const auto sel = select_mode(dups, nondups, 0.128);
  CHECK(sel.v_dup == 1.0);
  CHECK(sel.v_nondup == doctest::Approx((0.0 + 2.0 / 6) / 2));
  CHECK(sel.mode == FusionMode::Combined);
  std::vector<DocPair> swapped{{&b2, &a2}, {&b1, &a1}};
  CHECK(select_mode(dups, swapped, 0.128).v_nondup == sel.v_nondup);
  CHECK_THROWS_AS(select_mode(dups, std::vector<DocPair>{}, 0.128), Error);
}

TEST_CASE("ranking sorts by score with id tie-break and normalizes text") {
  std::vector<CandidateScores> c{{"b", 0.5, 2.0}, {"a", 0.5, 2.0}, {"c", 0.9, 0.0}, {"d", 0.1, 4.0}};
  FusionConfig cfg;
  cfg.w = 0.5;
  const auto r = rank_candidates("q", c, cfg, FusionMode::Combined);
  CHECK(order(r) == std::vector<std::string>{"d", "a", "b", "c"});
  CHECK(r.entries[0].s_txt == 1.0);
  CHECK(r.entries[1].s_txt == doctest::Approx(0.5));
  CHECK(r.entries[0].s_final == doctest::Approx(0.55));
  const auto v = rank_candidates("q", c, cfg, FusionMode::VisualOnly);
  CHECK(order(v) == std::vector<std::string>{"c", "a", "b", "d"});
  CHECK(v.mode_used == FusionMode::VisualOnly);
  CHECK(r.position_of("b") == 3);
  CHECK(r.position_of("zzz") == 0);
}

TEST_CASE("result JSON") {
  std::vector<CandidateScores> c{{"x", 0.25, 1.0}, {"y", 0.5, 0.0}};
  const auto r = rank_candidates("q", c, FusionConfig{}, FusionMode::Combined);
  const auto j = to_json(r);
  CHECK(j["query"] == "q");
  CHECK(j["mode_used"] == "combined");
  CHECK(j["entries"][0].contains("s_final"));
  const auto back = ranked_result_from_json(j);
  CHECK(order(back) == order(r));
  CHECK(back.entries[1].s_vis == r.entries[1].s_vis);
}

TEST_CASE("fusion config validation") {
  FusionConfig cfg;
  cfg.w = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.w = 0.2;
  cfg.va_threshold = -0.1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK(parse_visual_config("B+w-LCS") == VisualConfig::BoVWPlusWLcs);
  CHECK(to_string(VisualConfig::FLcs) == "f-LCS");
}

TEST_CASE("engine: exact copy ranks first with every channel at 1") {
  const ScreenWorld world;
  std::vector<VideoReport> reports{world.report("q", {0, 1, 2, 3}, "login error crash"),
                                   world.report("copy", {0, 1, 2, 3}, "login error crash"),
                                   world.report("other", {5, 6, 7}, "settings theme page")};
  const SimilarityEngine engine(reports, world.codebook, world.idf, EngineConfig{});
  for (auto vis : {VisualConfig::BoVW, VisualConfig::FLcs, VisualConfig::WLcs, VisualConfig::BoVWPlusFLcs,
                   VisualConfig::BoVWPlusWLcs}) {
    FusionConfig cfg;
    cfg.visual = vis;
    const auto r = engine.rank("q", {"copy", "other"}, cfg, FusionMode::Combined);
    REQUIRE(r.entries.size() == 2);
    CHECK(r.entries[0].id == "copy");
    CHECK(r.entries[0].s_vis == 1.0);
    CHECK(r.entries[0].s_txt == 1.0);
    CHECK(r.entries[0].s_final == 1.0);
  }
}

TEST_CASE("engine: duplicates sharing 80% of frames take the top two of 13") {
  const ScreenWorld world;
  std::vector<VideoReport> reports;
  reports.push_back(world.report("q", {0, 1, 2, 3, 4}, "login error crash"));
  reports.push_back(world.report("dup1", {20, 1, 2, 3, 4}, "login error crash"));
  reports.push_back(world.report("dup2", {0, 21, 2, 3, 4}, "login error crash report"));
  for (int i = 0; i < 11; ++i) {
    reports.push_back(world.report("n" + std::to_string(10 + i), {5 + i, 6 + i % 9, 7 + i % 5}, "settings page"));
  }
  const SimilarityEngine engine(reports, world.codebook, world.idf, EngineConfig{});
  std::vector<std::string> corpus;
  for (const auto& r : reports) {
    if (r.report_id != "q") corpus.push_back(r.report_id);
  }
  REQUIRE(corpus.size() == 13);
  for (auto vis : {VisualConfig::BoVW, VisualConfig::FLcs, VisualConfig::WLcs, VisualConfig::BoVWPlusFLcs,
                   VisualConfig::BoVWPlusWLcs}) {
    FusionConfig cfg;
    cfg.visual = vis;
    for (auto mode : {FusionMode::Combined, FusionMode::VisualOnly}) {
      const auto r = engine.rank("q", corpus, cfg, mode);
      CHECK(r.entries.size() == 13);
      std::set<std::string> top{r.entries[0].id, r.entries[1].id};
      CHECK(top == std::set<std::string>{"dup1", "dup2"});
    }
  }
}

TEST_CASE("engine: w=0 matches visual-only and a small agreement gap selects visual-only") {
  const ScreenWorld world;
  std::vector<VideoReport> reports{world.report("a1", {0, 1, 2}, "login page"),
                                   world.report("a2", {0, 1, 3}, "login page"),
                                   world.report("b1", {4, 5, 6}, "login page"),
                                   world.report("b2", {4, 7, 6}, "login page")};
  const SimilarityEngine engine(reports, world.codebook, world.idf, EngineConfig{});
  FusionConfig cfg;
  cfg.w = 0.0;
  cfg.visual = VisualConfig::BoVWPlusWLcs;
  const std::vector<std::string> corpus{"a2", "b1", "b2"};
  const auto combined = engine.rank("a1", corpus, cfg, FusionMode::Combined);
  const auto visual = engine.rank("a1", corpus, cfg, FusionMode::VisualOnly);
  CHECK(order(combined) == order(visual));
  for (std::size_t i = 0; i < combined.entries.size(); ++i) {
    CHECK(combined.entries[i].s_final == visual.entries[i].s_final);
  }
  const auto sel = engine.select_mode({{"a1", "a2"}, {"b1", "b2"}}, {{"a1", "b1"}, {"a2", "b2"}}, 0.128);
  CHECK(sel.mode == FusionMode::VisualOnly);
}

TEST_CASE("engine rejects unindexed reports") {
  const ScreenWorld world;
  std::vector<VideoReport> reports{world.report("a", {0}, "x"), test::text_report("bare", {"no vectors"})};
  try {
    SimilarityEngine engine(reports, world.codebook, world.idf, EngineConfig{});
    FAIL("expected a state error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::State);
  }
}
