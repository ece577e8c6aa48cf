#pragma once

#include "vdup/engine.hpp"
#include "vdup/fusion.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vdup {

/// Ground-truth grouping of reports: per app, each bug maps to the reports
/// that reproduce it.
struct Dataset {
  struct Bug {
    std::string bug_id;
    std::vector<std::string> reports;
  };
  struct App {
    std::string app_id;
    std::vector<Bug> bugs;
  };
  std::vector<App> apps;

  const App* find(const std::string& app_id) const;
  /// Pairs of reports of the same bug / of different bugs within one app.
  std::vector<std::pair<std::string, std::string>> duplicate_pairs(const App& app) const;
  std::vector<std::pair<std::string, std::string>> non_duplicate_pairs(const App& app) const;
};

nlohmann::json to_json(const Dataset& dataset);
Dataset dataset_from_json(const nlohmann::json& j);

struct DetectionTask {
  std::string app_id;
  std::string query_id;
  std::vector<std::string> ground_truth;        // the other reports of the query's bug
  std::vector<std::string> distractor_dup_ids;  // all reports of one other bug
  std::vector<std::string> unique_ids;          // one report of each remaining bug

  /// ground_truth + distractor_dup_ids + unique_ids.
  std::vector<std::string> corpus_ids() const;
  void validate() const;

  bool operator==(const DetectionTask&) const = default;
};

nlohmann::json to_json(const DetectionTask& task);
DetectionTask task_from_json(const nlohmann::json& j);
std::string tasks_to_jsonl(std::span<const DetectionTask> tasks);
std::vector<DetectionTask> tasks_from_jsonl(const std::string& text);

/// Enumerates every (query, other bug, non-duplicate video group) combination.
///
/// The three reports of each bug are spread over three video groups; the seed
/// only permutes which report of a bug lands in which group. With 10 bugs the
/// result is 10 * 3 * 9 * 3 = 810 tasks and 13 corpus reports per task.
/// Fewer than 10 bugs shrink the unique group and add a warning.
std::vector<DetectionTask> generate_tasks(const Dataset::App& app, std::uint64_t seed,
                                          std::vector<std::string>* warnings = nullptr);

constexpr int kMaxHitK = 10;

struct TaskMetrics {
  std::size_t rank = 0;  // 1-based position of the first ground-truth report
  double reciprocal_rank = 0.0;
  double average_precision = 0.0;
  std::array<bool, kMaxHitK> hit{};  // hit[k-1] = rank <= k
};

TaskMetrics evaluate_task(const RankedResult& result, const DetectionTask& task);

struct MetricsSummary {
  std::size_t task_count = 0;
  double mrr = 0.0;
  double map = 0.0;
  double mean_rank = 0.0;
  std::array<double, kMaxHitK> hit_rate{};
};

MetricsSummary aggregate(std::span<const TaskMetrics> per_task);

/// Pairwise (cascade) summation; result depends only on element order.
double pairwise_sum(std::span<const double> values);

/// One configuration of the experiment grid.
struct GridPoint {
  int fps = 0;  // 0 keeps the stored sampling rate
  Eigen::Index k = 50;
  VisualConfig visual = VisualConfig::BoVW;
  DocStrategy strategy = DocStrategy::AllText;
  double w = 0.2;
  double tau = 0.7;

  std::string label() const;
};

/// Parses axis specs such as "fps=1,5", "k=100,500", "vis=BoVW,B+w-LCS",
/// "strategy=all_text", "w=0,0.2", "tau=0.7" into the cartesian product,
/// starting from `base` for axes not mentioned.
std::vector<GridPoint> expand_grid(const std::vector<std::string>& axes, const GridPoint& base);

struct EvaluationOptions {
  std::vector<GridPoint> grid;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool selective = true;
  double va_threshold = 0.128;
  WlcsDenominator denominator = WlcsDenominator::Printed;
  std::optional<FrameRepr> frame_repr;
  /// Codebook training subsample; 0 uses every vector.
  std::size_t sample_size = 0;
  int max_iters = 100;
  /// Fixed codebook/IDF; when absent they are derived per (fps, k).
  std::optional<Codebook> codebook;
  std::optional<IdfTable> idf;
  /// Reference images (one descriptor list per image) used as IDF documents
  /// and, if `codebook_from_reference`, as codebook training data. When empty,
  /// every corpus frame acts as one IDF document.
  std::vector<std::vector<FeatureVector>> reference;
  bool codebook_from_reference = false;
};

struct EvaluationRow {
  std::string app_id;
  std::string config;
  FusionMode mode_used = FusionMode::Combined;
  double v_dup = 0.0;
  double v_nondup = 0.0;
  MetricsSummary metrics;
};

struct EvaluationReport {
  std::vector<EvaluationRow> rows;     // one per (config, app)
  std::vector<EvaluationRow> overall;  // one per config, pooled over apps
  std::vector<std::string> warnings;
};

/// Runs every grid point over every task. Output is independent of `jobs`.
EvaluationReport run_evaluation(std::span<const VideoReport> reports, const Dataset& dataset,
                                std::span<const DetectionTask> tasks, const EvaluationOptions& options);

std::string to_csv(const EvaluationReport& report);
nlohmann::json to_json(const EvaluationReport& report);

}  // namespace vdup
