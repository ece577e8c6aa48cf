#include "vdup/eval.hpp"

#include "vdup/error.hpp"
#include "vdup/kmeans.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace vdup {

using nlohmann::json;

const Dataset::App* Dataset::find(const std::string& app_id) const {
  for (const auto& a : apps) {
    if (a.app_id == app_id) return &a;
  }
  return nullptr;
}

std::vector<std::pair<std::string, std::string>> Dataset::duplicate_pairs(const App& app) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& bug : app.bugs) {
    for (std::size_t i = 0; i < bug.reports.size(); ++i) {
      for (std::size_t j = i + 1; j < bug.reports.size(); ++j) out.emplace_back(bug.reports[i], bug.reports[j]);
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> Dataset::non_duplicate_pairs(const App& app) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t a = 0; a < app.bugs.size(); ++a) {
    for (std::size_t b = a + 1; b < app.bugs.size(); ++b) {
      for (const auto& ra : app.bugs[a].reports) {
        for (const auto& rb : app.bugs[b].reports) out.emplace_back(ra, rb);
      }
    }
  }
  return out;
}

json to_json(const Dataset& dataset) {
  json apps = json::array();
  for (const auto& app : dataset.apps) {
    json bugs = json::array();
    for (const auto& bug : app.bugs) bugs.push_back({{"bug_id", bug.bug_id}, {"reports", bug.reports}});
    apps.push_back({{"app_id", app.app_id}, {"bugs", std::move(bugs)}});
  }
  return {{"apps", std::move(apps)}};
}

Dataset dataset_from_json(const json& j) {
  try {
    Dataset d;
    for (const auto& aj : j.at("apps")) {
      Dataset::App app;
      app.app_id = aj.at("app_id").get<std::string>();
      for (const auto& bj : aj.at("bugs")) {
        app.bugs.push_back({bj.at("bug_id").get<std::string>(), bj.at("reports").get<std::vector<std::string>>()});
      }
      d.apps.push_back(std::move(app));
    }
    return d;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("dataset: ") + e.what());
  }
}

std::vector<std::string> DetectionTask::corpus_ids() const {
  std::vector<std::string> out = ground_truth;
  out.insert(out.end(), distractor_dup_ids.begin(), distractor_dup_ids.end());
  out.insert(out.end(), unique_ids.begin(), unique_ids.end());
  return out;
}

void DetectionTask::validate() const {
  if (query_id.empty()) fail(ErrorKind::Validation, "task has no query");
  if (ground_truth.empty()) fail(ErrorKind::Validation, "task '" + query_id + "' has no ground truth");
  const auto corpus = corpus_ids();
  std::set<std::string> seen(corpus.begin(), corpus.end());
  if (seen.size() != corpus.size()) fail(ErrorKind::Validation, "task '" + query_id + "' has overlapping groups");
  if (seen.count(query_id)) fail(ErrorKind::Validation, "task '" + query_id + "' lists its query in the corpus");
}

json to_json(const DetectionTask& t) {
  return {{"app", t.app_id},
          {"query", t.query_id},
          {"ground_truth", t.ground_truth},
          {"distractor_dups", t.distractor_dup_ids},
          {"unique", t.unique_ids}};
}

DetectionTask task_from_json(const json& j) {
  try {
    DetectionTask t;
    t.app_id = j.at("app").get<std::string>();
    t.query_id = j.at("query").get<std::string>();
    t.ground_truth = j.at("ground_truth").get<std::vector<std::string>>();
    t.distractor_dup_ids = j.at("distractor_dups").get<std::vector<std::string>>();
    t.unique_ids = j.at("unique").get<std::vector<std::string>>();
    t.validate();
    return t;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("task: ") + e.what());
  }
}

std::string tasks_to_jsonl(std::span<const DetectionTask> tasks) {
  std::string out;
  for (const auto& t : tasks) {
    out += to_json(t).dump();
    out += '\n';
  }
  return out;
}

std::vector<DetectionTask> tasks_from_jsonl(const std::string& text) {
  std::vector<DetectionTask> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(task_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      fail(ErrorKind::Parse, "tasks line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      fail(e.kind(), "tasks line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<DetectionTask> generate_tasks(const Dataset::App& app, std::uint64_t seed,
                                          std::vector<std::string>* warnings) {
  constexpr std::size_t kVideosPerBug = 3;
  constexpr std::size_t kFullBugs = 10;
  const std::size_t bugs = app.bugs.size();
  if (bugs < 4) {
    fail(ErrorKind::Validation, "app '" + app.app_id + "' has " + std::to_string(bugs) +
                                    " bugs; tasks need at least 4 (query, other-bug and unique groups)");
  }
  for (const auto& bug : app.bugs) {
    if (bug.reports.size() != kVideosPerBug) {
      fail(ErrorKind::Validation, "bug '" + bug.bug_id + "' of app '" + app.app_id + "' has " +
                                      std::to_string(bug.reports.size()) + " reports; expected 3");
    }
  }
  if (bugs < kFullBugs && warnings) {
    warnings->push_back("app '" + app.app_id + "': " + std::to_string(bugs) + " bugs, unique group shrinks to " +
                        std::to_string(bugs - 2) + " reports (13-report corpus needs 10 bugs)");
  }

  // groups[g][b]: report of bug b in video group g.
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::string>> groups(kVideosPerBug, std::vector<std::string>(bugs));
  for (std::size_t b = 0; b < bugs; ++b) {
    std::vector<std::string> perm = app.bugs[b].reports;
    for (std::size_t i = perm.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(detail::unit_draw(rng) * static_cast<double>(i + 1));
      std::swap(perm[i], perm[j]);
    }
    for (std::size_t g = 0; g < kVideosPerBug; ++g) groups[g][b] = perm[g];
  }

  std::vector<DetectionTask> tasks;
  tasks.reserve(bugs * kVideosPerBug * (bugs - 1) * kVideosPerBug);
  for (std::size_t qb = 0; qb < bugs; ++qb) {
    const auto& qreports = app.bugs[qb].reports;
    for (std::size_t qv = 0; qv < kVideosPerBug; ++qv) {
      std::vector<std::string> truth;
      for (std::size_t v = 0; v < kVideosPerBug; ++v) {
        if (v != qv) truth.push_back(qreports[v]);
      }
      for (std::size_t db = 0; db < bugs; ++db) {
        if (db == qb) continue;
        for (std::size_t g = 0; g < kVideosPerBug; ++g) {
          DetectionTask t;
          t.app_id = app.app_id;
          t.query_id = qreports[qv];
          t.ground_truth = truth;
          t.distractor_dup_ids = app.bugs[db].reports;
          for (std::size_t rb = 0; rb < bugs; ++rb) {
            if (rb != qb && rb != db) t.unique_ids.push_back(groups[g][rb]);
          }
          t.validate();
          tasks.push_back(std::move(t));
        }
      }
    }
  }
  return tasks;
}

TaskMetrics evaluate_task(const RankedResult& result, const DetectionTask& task) {
  for (const auto& id : task.corpus_ids()) {
    if (result.position_of(id) == 0) {
      fail(ErrorKind::Validation, "ranked result for '" + task.query_id + "' misses corpus report '" + id + "'");
    }
  }
  std::vector<std::size_t> positions;
  for (const auto& id : task.ground_truth) positions.push_back(result.position_of(id));
  std::sort(positions.begin(), positions.end());

  TaskMetrics m;
  m.rank = positions.front();
  m.reciprocal_rank = 1.0 / static_cast<double>(m.rank);
  double ap = 0.0;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    ap += static_cast<double>(k + 1) / static_cast<double>(positions[k]);
  }
  m.average_precision = ap / static_cast<double>(positions.size());
  for (int k = 1; k <= kMaxHitK; ++k) m.hit[k - 1] = m.rank <= static_cast<std::size_t>(k);
  return m;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

MetricsSummary aggregate(std::span<const TaskMetrics> per_task) {
  MetricsSummary s;
  s.task_count = per_task.size();
  if (per_task.empty()) return s;
  const double n = static_cast<double>(per_task.size());
  std::vector<double> rr, ap, rank;
  std::array<std::vector<double>, kMaxHitK> hits;
  for (const auto& m : per_task) {
    rr.push_back(m.reciprocal_rank);
    ap.push_back(m.average_precision);
    rank.push_back(static_cast<double>(m.rank));
    for (int k = 0; k < kMaxHitK; ++k) hits[k].push_back(m.hit[k] ? 1.0 : 0.0);
  }
  s.mrr = pairwise_sum(rr) / n;
  s.map = pairwise_sum(ap) / n;
  s.mean_rank = pairwise_sum(rank) / n;
  for (int k = 0; k < kMaxHitK; ++k) s.hit_rate[k] = pairwise_sum(hits[k]) / n;
  return s;
}

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& axis) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::Validation, "grid axis '" + axis + "': bad value '" + s + "'");
  }
}

}  // namespace

std::string GridPoint::label() const {
  std::string out = "fps=" + std::to_string(fps) + ";k=" + std::to_string(k) + ";vis=" + std::string(to_string(visual)) +
                    ";strategy=" + std::string(to_string(strategy)) + ";w=" + format_number(w) +
                    ";tau=" + format_number(tau);
  return out;
}

std::vector<GridPoint> expand_grid(const std::vector<std::string>& axes, const GridPoint& base) {
  std::vector<int> fps{base.fps};
  std::vector<Eigen::Index> ks{base.k};
  std::vector<VisualConfig> vis{base.visual};
  std::vector<DocStrategy> strategies{base.strategy};
  std::vector<double> ws{base.w};
  std::vector<double> taus{base.tau};
  for (const auto& axis : axes) {
    const auto eq = axis.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Validation, "grid axis '" + axis + "' must look like name=v1,v2");
    const std::string name = axis.substr(0, eq);
    const auto values = split(axis.substr(eq + 1), ',');
    if (values.empty() || (values.size() == 1 && values[0].empty())) {
      fail(ErrorKind::Validation, "grid axis '" + name + "' has no values");
    }
    if (name == "fps") {
      fps.clear();
      for (const auto& v : values) {
        const double d = parse_double(v, name);
        if (d < 1 || d != static_cast<int>(d)) fail(ErrorKind::Validation, "grid fps values must be positive integers");
        fps.push_back(static_cast<int>(d));
      }
    } else if (name == "k") {
      ks.clear();
      for (const auto& v : values) {
        const double d = parse_double(v, name);
        if (d < 1 || d != static_cast<Eigen::Index>(d)) fail(ErrorKind::Validation, "grid k values must be positive integers");
        ks.push_back(static_cast<Eigen::Index>(d));
      }
    } else if (name == "vis" || name == "config") {
      vis.clear();
      for (const auto& v : values) vis.push_back(parse_visual_config(v));
    } else if (name == "strategy") {
      strategies.clear();
      for (const auto& v : values) strategies.push_back(parse_doc_strategy(v));
    } else if (name == "w") {
      ws.clear();
      for (const auto& v : values) ws.push_back(parse_double(v, name));
    } else if (name == "tau") {
      taus.clear();
      for (const auto& v : values) taus.push_back(parse_double(v, name));
    } else {
      fail(ErrorKind::Validation, "unknown grid axis '" + name + "'");
    }
  }
  std::vector<GridPoint> out;
  for (int f : fps)
    for (auto k : ks)
      for (auto v : vis)
        for (auto s : strategies)
          for (double w : ws)
            for (double t : taus) out.push_back({f, k, v, s, w, t});
  return out;
}

namespace {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; each index is written
/// by exactly one worker, so results do not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct VisualModel {
  Codebook codebook;
  IdfTable idf;
};

VisualModel build_visual_model(std::span<const VideoReport> reports, const EvaluationOptions& options,
                               const GridPoint& point) {
  VisualModel model;
  std::string extractor_id;
  for (const auto& r : reports) {
    if (!r.extractor_id.empty()) {
      extractor_id = r.extractor_id;
      break;
    }
  }
  if (options.codebook) {
    model.codebook = *options.codebook;
  } else {
    std::vector<FeatureVector> features;
    if (options.codebook_from_reference) {
      for (const auto& doc : options.reference) features.insert(features.end(), doc.begin(), doc.end());
    } else {
      for (const auto& r : reports) {
        for (const auto& f : r.frames) features.insert(features.end(), f.vectors.begin(), f.vectors.end());
      }
    }
    features = sample_features(features, options.sample_size, options.seed);
    CodebookTrainingOptions opts;
    opts.k = point.k;
    opts.seed = options.seed;
    opts.max_iters = options.max_iters;
    opts.extractor_id = extractor_id;
    model.codebook = train_codebook(features, opts);
  }
  if (options.idf) {
    model.idf = *options.idf;
  } else {
    std::vector<std::vector<TermId>> docs;
    if (!options.reference.empty()) {
      for (const auto& doc : options.reference) docs.push_back(assign_words(doc, model.codebook));
    } else {
      for (const auto& r : reports) {
        for (const auto& f : r.frames) docs.push_back(assign_words(f.vectors, model.codebook));
      }
    }
    model.idf = build_idf(docs);
  }
  return model;
}

}  // namespace

EvaluationReport run_evaluation(std::span<const VideoReport> reports, const Dataset& dataset,
                                std::span<const DetectionTask> tasks, const EvaluationOptions& options) {
  EvaluationReport report;
  if (options.grid.empty()) fail(ErrorKind::Validation, "evaluation grid is empty");

  // Apps in first-seen task order.
  std::vector<std::string> apps;
  for (const auto& t : tasks) {
    if (std::find(apps.begin(), apps.end(), t.app_id) == apps.end()) apps.push_back(t.app_id);
  }

  std::map<std::pair<int, Eigen::Index>, VisualModel> models;
  for (const auto& point : options.grid) {
    FusionConfig fusion;
    fusion.w = point.w;
    fusion.visual = point.visual;
    fusion.selective = options.selective;
    fusion.va_threshold = options.va_threshold;
    fusion.validate();

    std::vector<VideoReport> sampled;
    sampled.reserve(reports.size());
    for (const auto& r : reports) sampled.push_back(subsample(r, point.fps));

    const auto key = std::make_pair(point.fps, point.k);
    if (!models.count(key)) models.emplace(key, build_visual_model(sampled, options, point));
    const VisualModel& model = models.at(key);

    std::vector<TaskMetrics> pooled;
    for (const auto& app : apps) {
      std::vector<VideoReport> app_reports;
      for (const auto& r : sampled) {
        if (r.app_id == app) app_reports.push_back(r);
      }
      EngineConfig ecfg;
      ecfg.strategy = point.strategy;
      ecfg.tau = point.tau;
      ecfg.frame_repr = options.frame_repr;
      ecfg.denominator = options.denominator;
      const SimilarityEngine engine(std::move(app_reports), model.codebook, model.idf, ecfg);

      EvaluationRow row;
      row.app_id = app;
      row.config = point.label();
      row.mode_used = FusionMode::Combined;
      if (options.selective) {
        const Dataset::App* dapp = dataset.find(app);
        std::vector<std::pair<std::string, std::string>> dups, nondups;
        if (dapp) {
          dups = dataset.duplicate_pairs(*dapp);
          nondups = dataset.non_duplicate_pairs(*dapp);
        }
        if (dups.empty() || nondups.empty()) {
          report.warnings.push_back("app '" + app + "': no duplicate history, falling back to combined mode");
        } else {
          const ModeSelection sel = engine.select_mode(dups, nondups, options.va_threshold);
          row.mode_used = sel.mode;
          row.v_dup = sel.v_dup;
          row.v_nondup = sel.v_nondup;
        }
      }

      std::vector<const DetectionTask*> app_tasks;
      for (const auto& t : tasks) {
        if (t.app_id == app) app_tasks.push_back(&t);
      }
      std::map<std::pair<std::string, std::string>, std::size_t> pair_slot;
      std::vector<std::pair<std::string, std::string>> pairs;
      for (const auto* t : app_tasks) {
        for (const auto& c : t->corpus_ids()) {
          auto p = std::make_pair(t->query_id, c);
          if (pair_slot.emplace(p, pairs.size()).second) pairs.push_back(std::move(p));
        }
      }
      std::vector<PairScores> scores(pairs.size());
      const bool with_lcs = needs_lcs(point.visual);
      parallel_for(pairs.size(), options.jobs, [&](std::size_t i) {
        scores[i] = engine.pair_scores(pairs[i].first, pairs[i].second, with_lcs);
      });

      std::vector<TaskMetrics> metrics(app_tasks.size());
      parallel_for(app_tasks.size(), options.jobs, [&](std::size_t i) {
        const DetectionTask& t = *app_tasks[i];
        std::vector<CandidateScores> cands;
        for (const auto& c : t.corpus_ids()) {
          const PairScores& s = scores[pair_slot.at({t.query_id, c})];
          cands.push_back({c, visual_score(s, point.visual), s.txt_raw});
        }
        metrics[i] = evaluate_task(rank_candidates(t.query_id, cands, fusion, row.mode_used), t);
      });
      row.metrics = aggregate(metrics);
      pooled.insert(pooled.end(), metrics.begin(), metrics.end());
      report.rows.push_back(std::move(row));
    }
    EvaluationRow overall;
    overall.app_id = "Overall";
    overall.config = point.label();
    overall.metrics = aggregate(pooled);
    report.overall.push_back(std::move(overall));
  }
  return report;
}

std::string to_csv(const EvaluationReport& report) {
  std::string out = "app,config,mRR,mAP,meanRank";
  for (int k = 1; k <= kMaxHitK; ++k) out += ",HIT@" + std::to_string(k);
  out += '\n';
  char buf[32];
  for (const auto& row : report.rows) {
    out += row.app_id + "," + row.config;
    for (double v : {row.metrics.mrr, row.metrics.map, row.metrics.mean_rank}) {
      std::snprintf(buf, sizeof buf, ",%.6f", v);
      out += buf;
    }
    for (double v : row.metrics.hit_rate) {
      std::snprintf(buf, sizeof buf, ",%.6f", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

namespace {

json row_json(const EvaluationRow& row) {
  json hits = json::object();
  for (int k = 1; k <= kMaxHitK; ++k) hits["HIT@" + std::to_string(k)] = row.metrics.hit_rate[k - 1];
  return {{"app", row.app_id},
          {"config", row.config},
          {"mode_used", std::string(to_string(row.mode_used))},
          {"v_dup", row.v_dup},
          {"v_nondup", row.v_nondup},
          {"tasks", row.metrics.task_count},
          {"mRR", row.metrics.mrr},
          {"mAP", row.metrics.map},
          {"meanRank", row.metrics.mean_rank},
          {"hit", std::move(hits)}};
}

}  // namespace

json to_json(const EvaluationReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) rows.push_back(row_json(r));
  json overall = json::array();
  for (const auto& r : report.overall) overall.push_back(row_json(r));
  return {{"rows", std::move(rows)}, {"overall", std::move(overall)}, {"warnings", report.warnings}};
}

}  // namespace vdup
