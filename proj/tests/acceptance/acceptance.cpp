// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "../oracles.hpp"
#include "../support.hpp"

#include "vdup/engine.hpp"
#include "vdup/eval.hpp"
#include "vdup/features.hpp"
#include "vdup/fusion.hpp"
#include "vdup/ingestion.hpp"
#include "vdup/kmeans.hpp"
#include "vdup/sequence.hpp"
#include "vdup/synth.hpp"
#include "vdup/visual_index.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

using namespace vdup;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome lcs_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> len(1, 8);
  std::uniform_real_distribution<double> tau_draw(0.3, 0.95);
  int worst_pair = -1, matched = 0;
  double worst = 0;
  for (int p = 0; p < 500; ++p) {
    // Frames come from a small palette plus noise so matches are common.
    std::vector<FeatureVector> palette;
    for (int c = 0; c < 4; ++c) {
      FeatureVector v(6);
      for (auto& x : v) x = g(rng);
      palette.push_back(v);
    }
    auto draw = [&](int n) {
      std::vector<FeatureVector> frames;
      for (int i = 0; i < n; ++i) {
        FeatureVector v = palette[rng() % palette.size()];
        for (auto& x : v) x += 0.15 * g(rng);
        frames.push_back(v);
      }
      return frames;
    };
    const auto fa = draw(len(rng));
    const auto fb = draw(len(rng));
    const double tau = tau_draw(rng);

    oracle::Matrix sim(fa.size(), std::vector<double>(fb.size()));
    for (std::size_t i = 0; i < fa.size(); ++i) {
      for (std::size_t j = 0; j < fb.size(); ++j) {
        sim[i][j] = oracle::cosine(std::vector<double>(fa[i].begin(), fa[i].end()),
                                   std::vector<double>(fb[j].begin(), fb[j].end()));
      }
    }
    const auto a = test::single_report("a", fa);
    const auto b = test::single_report("b", fb);
    FrameSimConfig cfg;
    cfg.tau = tau;
    const double want_f = oracle::best_window(sim, tau, false);
    matched += want_f > 0;
    const double df = std::abs(f_lcs(a, b, cfg).overlap - want_f);
    const double dw = std::abs(w_lcs(a, b, cfg).overlap - oracle::best_window(sim, tau, true));
    if (std::max(df, dw) > worst) {
      worst = std::max(df, dw);
      worst_pair = p;
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst <= 1e-9 && secs < 10.0 && matched > 100;
  o.detail = fmt("max |diff|=%.3g, %.2fs, ", worst, secs) + std::to_string(matched) + "/500 pairs with a match";
  if (worst > 1e-9) o.detail += " (pair " + std::to_string(worst_pair) + ")";
  return o;
}

Outcome wlcs_denominators() {
  double worst = 0;
  bool degenerate_ok = true;
  for (int mx = 1; mx <= 10; ++mx) {
    for (int mn = 1; mn <= mx; ++mn) {
      const double want = oracle::printed_denominator(mn, mx);
      worst = std::max(worst, std::abs(wlcs_denominator(mn, mx) - want));
      if (want > 0) {
        for (double overlap : {0.0, 0.1, 0.5 * want, want}) {
          worst = std::max(worst, std::abs(normalize_wlcs(overlap, mn, mx) - std::min(1.0, overlap / want)));
        }
      }
    }
  }
  degenerate_ok = wlcs_denominator(1, 1) == 0.0 && normalize_wlcs(0.4, 1, 1) == 1.0 && normalize_wlcs(0.0, 1, 1) == 0.0;
  Outcome o;
  o.pass = worst <= 1e-12 && degenerate_ok;
  o.detail = fmt("max |diff|=%.3g", worst) + (degenerate_ok ? ", min=max=1 ok" : ", min=max=1 WRONG");
  return o;
}

Outcome metric_oracle() {
  DetectionTask task;
  task.app_id = "app";
  task.query_id = "q";
  task.ground_truth = {"g1", "g2"};
  task.distractor_dup_ids = {"d1", "d2", "d3"};
  for (int i = 1; i <= 8; ++i) task.unique_ids.push_back("u" + std::to_string(i));
  auto ids = task.corpus_ids();
  const std::set<std::string> relevant(task.ground_truth.begin(), task.ground_truth.end());

  std::mt19937_64 rng(13);
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    std::shuffle(ids.begin(), ids.end(), rng);
    RankedResult r;
    r.query_id = "q";
    for (std::size_t i = 0; i < ids.size(); ++i) r.entries.push_back({ids[i], 0, 0, 1.0 - 0.01 * double(i)});
    const auto got = evaluate_task(r, task);
    const auto want = oracle::metrics(ids, relevant);
    bool same = got.rank == want.rank && got.reciprocal_rank == want.rr && got.average_precision == want.ap;
    for (int k = 0; k < kMaxHitK; ++k) same = same && got.hit[k] == want.hit[k];
    mismatches += !same;
  }
  return {mismatches == 0, std::to_string(mismatches) + "/1000 mismatches"};
}

Outcome task_shape() {
  Dataset::App app;
  app.app_id = "app";
  for (int b = 0; b < 10; ++b) {
    Dataset::Bug bug;
    bug.bug_id = "b" + std::to_string(b);
    for (int v = 0; v < 3; ++v) bug.reports.push_back(bug.bug_id + "-v" + std::to_string(v));
    app.bugs.push_back(bug);
  }
  std::map<std::string, std::string> bug_of;
  for (const auto& bug : app.bugs) {
    for (const auto& r : bug.reports) bug_of[r] = bug.bug_id;
  }
  std::vector<std::string> warnings;
  const auto tasks = generate_tasks(app, 7, &warnings);
  int bad = 0;
  std::set<std::string> seen;
  for (const auto& t : tasks) {
    const auto qb = bug_of.at(t.query_id);
    bool ok = t.ground_truth.size() == 2 && t.distractor_dup_ids.size() == 3 && t.unique_ids.size() == 8;
    for (const auto& id : t.ground_truth) ok = ok && bug_of.at(id) == qb && id != t.query_id;
    std::set<std::string> dbugs, ubugs;
    for (const auto& id : t.distractor_dup_ids) dbugs.insert(bug_of.at(id));
    for (const auto& id : t.unique_ids) ubugs.insert(bug_of.at(id));
    ok = ok && dbugs.size() == 1 && !dbugs.count(qb) && ubugs.size() == 8 && !ubugs.count(qb) &&
         !ubugs.count(*dbugs.begin());
    bad += !ok;
    seen.insert(nlohmann::json(to_json(t)).dump());
  }
  Outcome o;
  o.pass = tasks.size() == 810 && bad == 0 && seen.size() == 810 && warnings.empty();
  o.detail = std::to_string(tasks.size()) + " tasks, " + std::to_string(seen.size()) + " distinct, " +
             std::to_string(bad) + " malformed";
  return o;
}

// Two 1000-token documents sharing `shared` tokens have Dice agreement shared/1000.
std::pair<TextDocument, TextDocument> docs_with_agreement(int shared, const std::string& tag) {
  TextDocument a, b;
  for (int i = 0; i < 1000; ++i) {
    a.tokens.push_back(tag + "a" + std::to_string(i));
    b.tokens.push_back(i < shared ? a.tokens.back() : tag + "b" + std::to_string(i));
  }
  return {a, b};
}

Outcome selector() {
  struct Row {
    const char* app;
    int dup, nondup;  // per mille
    FusionMode expected;
  };
  const std::vector<Row> rows = {{"APOD", 708, 379, FusionMode::Combined},  {"DROID", 739, 570, FusionMode::Combined},
                                 {"GNU", 822, 586, FusionMode::Combined},   {"GROW", 670, 417, FusionMode::Combined},
                                 {"TIME", 860, 863, FusionMode::VisualOnly}, {"TOK", 696, 610, FusionMode::VisualOnly}};
  std::string detail;
  bool pass = true;
  for (const auto& r : rows) {
    const auto d = docs_with_agreement(r.dup, "d");
    const auto n = docs_with_agreement(r.nondup, "n");
    const std::vector<DocPair> dp = {{&d.first, &d.second}};
    const std::vector<DocPair> np = {{&n.first, &n.second}};
    const auto sel = select_mode(dp, np, 0.128);
    pass = pass && sel.mode == r.expected && sel.v_dup == r.dup / 1000.0 && sel.v_nondup == r.nondup / 1000.0;
    detail += std::string(detail.empty() ? "" : " ") + r.app + "=" + std::string(to_string(sel.mode));
  }
  return {pass, detail};
}

// Synthetic corpus shared by the end-to-end and fusion-limit checks.
struct SynthWorld {
  test::Scratch dir;
  Dataset dataset;
  std::vector<VideoReport> reports;
  std::vector<std::vector<FeatureVector>> reference;
  std::vector<DetectionTask> tasks;
  double build_seconds = 0;

  SynthWorld() {
    const auto t0 = Clock::now();
    SynthSpec spec;
    spec.bugs = 4;
    spec.videos_per_bug = 3;
    spec.frames_per_video = 8;
    spec.shared_frame_ratio = 0.8;
    spec.vocab_overlap = 0.0;
    spec.seed = 11;
    const auto out = synth_corpus(spec, dir.path());
    dataset = out.dataset;
    CorpusStore store(dir.path());
    const auto extractor = ExtractorSpec::single_default();
    for (const auto& r : store.read_all()) extract_report_features(store, r.report_id, extractor);
    reports = store.read_all();
    for (const auto& p : out.reference_images) reference.push_back(extract(to_gray(read_png(p)), extractor));
    for (const auto& app : dataset.apps) {
      for (auto& t : generate_tasks(app, 11)) tasks.push_back(std::move(t));
    }
    build_seconds = seconds_since(t0);
  }
};

Outcome synthetic_end_to_end(const SynthWorld& world) {
  const auto t0 = Clock::now();
  EvaluationOptions opts;
  opts.seed = 11;
  GridPoint base;
  base.k = 50;
  opts.grid = expand_grid({"vis=BoVW,f-LCS,w-LCS,B+f-LCS,B+w-LCS"}, base);
  opts.reference = world.reference;
  const auto report = run_evaluation(world.reports, world.dataset, world.tasks, opts);
  const double secs = world.build_seconds + seconds_since(t0);
  bool pass = secs < 60.0 && !report.rows.empty();
  std::string detail;
  for (const auto& row : report.rows) {
    pass = pass && row.metrics.task_count == world.tasks.size() && row.metrics.mrr == 1.0 &&
           row.metrics.hit_rate[0] == 1.0;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s mRR=%.4f HIT@1=%.4f; ", row.config.c_str(), row.metrics.mrr,
                  row.metrics.hit_rate[0]);
    detail += buf;
  }
  detail += std::to_string(world.tasks.size()) + " tasks, " + fmt("%.1fs", secs);
  return {pass, detail};
}

Outcome fusion_limits(const SynthWorld& world) {
  std::vector<FeatureVector> all;
  for (const auto& r : world.reports) {
    for (const auto& f : r.frames) all.insert(all.end(), f.vectors.begin(), f.vectors.end());
  }
  CodebookTrainingOptions copts;
  copts.k = 50;
  copts.seed = 11;
  copts.extractor_id = world.reports.front().extractor_id;
  const auto codebook = train_codebook(all, copts);
  std::vector<std::vector<TermId>> docs;
  for (const auto& img : world.reference) docs.push_back(assign_words(img, codebook));
  const SimilarityEngine engine(world.reports, codebook, build_idf(docs), EngineConfig{});

  int checked = 0, bad_vis = 0, bad_txt = 0;
  for (const auto& task : world.tasks) {
    const auto corpus = task.corpus_ids();
    // Independent text-only ordering: min-max normalized raw score desc, id asc.
    std::vector<std::pair<std::string, double>> raw;
    for (const auto& id : corpus) raw.emplace_back(id, engine.pair_scores(task.query_id, id, false).txt_raw);
    double lo = raw.front().second, hi = lo;
    for (const auto& [id, s] : raw) lo = std::min(lo, s), hi = std::max(hi, s);
    for (auto& [id, s] : raw) s = hi > lo ? (s - lo) / (hi - lo) : 0.0;
    std::sort(raw.begin(), raw.end(),
              [](const auto& x, const auto& y) { return x.second != y.second ? x.second > y.second : x.first < y.first; });
    std::vector<std::string> text_order;
    for (const auto& [id, s] : raw) text_order.push_back(id);

    for (auto vc : {VisualConfig::BoVW, VisualConfig::FLcs, VisualConfig::WLcs, VisualConfig::BoVWPlusFLcs,
                    VisualConfig::BoVWPlusWLcs}) {
      FusionConfig cfg;
      cfg.visual = vc;
      cfg.w = 0.0;
      const auto w0 = engine.rank(task.query_id, corpus, cfg, FusionMode::Combined);
      const auto vis = engine.rank(task.query_id, corpus, cfg, FusionMode::VisualOnly);
      cfg.w = 1.0;
      const auto w1 = engine.rank(task.query_id, corpus, cfg, FusionMode::Combined);
      std::vector<std::string> a, b, c;
      for (std::size_t i = 0; i < w0.entries.size(); ++i) {
        a.push_back(w0.entries[i].id);
        b.push_back(vis.entries[i].id);
        c.push_back(w1.entries[i].id);
      }
      bad_vis += a != b;
      bad_txt += c != text_order;
      ++checked;
    }
  }
  return {bad_vis == 0 && bad_txt == 0 && checked > 0,
          std::to_string(checked) + " rankings, w=0 mismatches " + std::to_string(bad_vis) + ", w=1 mismatches " +
              std::to_string(bad_txt)};
}

Outcome determinism() {
  test::Scratch dir;
  const std::string bin = VDUP_BIN;
  const std::string r = bin + " --root " + dir.path().string() + " --seed 5 ";
  int code = 0;
  std::string log;
  auto step = [&](const std::string& args) {
    if (code != 0) return;
    log = test::shell_run(r + args, &code);
  };
  step("synth --reference-images 40");
  step("ingest --extract single");
  step("gen-tasks");
  const std::string eval = "evaluate --grid k=20 vis=BoVW,B+w-LCS --reference " + (dir / "_reference").string();
  step("--jobs 1 " + eval + " --csv " + (dir / "a.csv").string());
  step("--jobs 1 " + eval + " --csv " + (dir / "b.csv").string());
  step("--jobs 4 " + eval + " --csv " + (dir / "c.csv").string());
  if (code != 0) return {false, "cli failed: " + log};
  const auto a = read_file(dir / "a.csv");
  const bool pass = !a.empty() && a == read_file(dir / "b.csv") && a == read_file(dir / "c.csv");
  return {pass, std::to_string(a.size()) + " CSV bytes, jobs 1/1/4 " + (pass ? "identical" : "differ")};
}

Outcome kmeans_sanity() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  const int n = 400, dim = 6, k = 8;
  Eigen::MatrixXd pts(dim, n);
  for (int i = 0; i < n; ++i) {
    const double shift = 3.0 * (i % 5);
    for (int d = 0; d < dim; ++d) pts(d, i) = g(rng) + (d == i % dim ? shift : 0.0);
  }
  const auto km = kmeans<double>(pts, k, 3);
  std::vector<std::vector<double>> points(n, std::vector<double>(dim));
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d) points[i][d] = pts(d, i);
  }
  std::vector<int> labels(km.labels.begin(), km.labels.end());
  const double ours = oracle::inertia(points, labels, k);
  const double random_best = oracle::best_random_inertia(points, k, 1000, 4);
  bool monotone = true;
  for (std::size_t i = 1; i < km.inertia_history.size(); ++i) {
    monotone = monotone && km.inertia_history[i] <= km.inertia_history[i - 1] * (1 + 1e-12);
  }

  // Same checks through codebook training.
  std::vector<FeatureVector> feats;
  for (int i = 0; i < n; ++i) feats.push_back(pts.col(i));
  std::vector<double> history;
  CodebookTrainingOptions opts;
  opts.k = k;
  opts.seed = 3;
  train_codebook(feats, opts, &history);
  for (std::size_t i = 1; i < history.size(); ++i) monotone = monotone && history[i] <= history[i - 1] * (1 + 1e-12);

  return {ours <= random_best && monotone,
          fmt("inertia %.2f vs best random %.2f", ours, random_best) + ", " +
              std::to_string(km.inertia_history.size()) + " steps" + (monotone ? " non-increasing" : " INCREASED")};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  };

  report("lcs-oracle", lcs_oracle);
  report("wlcs-denominator", wlcs_denominators);
  report("metric-oracle", metric_oracle);
  report("task-shape", task_shape);
  report("selector-table", selector);
  std::unique_ptr<SynthWorld> world;
  report("synthetic-end-to-end", [&] {
    world = std::make_unique<SynthWorld>();
    return synthetic_end_to_end(*world);
  });
  report("fusion-limits", [&] {
    if (!world) return Outcome{false, "no synthetic corpus"};
    return fusion_limits(*world);
  });
  report("determinism", determinism);
  report("kmeans-sanity", kmeans_sanity);
  return failures ? 1 : 0;
}
