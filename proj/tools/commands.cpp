#include "commands.hpp"

#include "vdup/corpus_store.hpp"
#include "vdup/engine.hpp"
#include "vdup/error.hpp"
#include "vdup/eval.hpp"
#include "vdup/features.hpp"
#include "vdup/ingestion.hpp"
#include "vdup/synth.hpp"
#include "vdup/visual_index.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <set>
#include <string>
#include <vector>

namespace vdup::cli {
namespace {

constexpr int kInputError = 2;
constexpr int kStateError = 3;

const std::vector<std::string> kSubcommands = {"ingest",    "train-codebook", "build-idf", "index-text",
                                               "gen-tasks", "query",          "evaluate",  "synth"};

struct Global {
  std::string root;
  std::string config_file;
  std::uint64_t seed = 0;
  int jobs = 1;
};

fs::path artifact(const std::string& flag, const Global& g, const fs::path& name) {
  return flag.empty() ? fs::path(g.root) / name : fs::path(flag);
}

nlohmann::json load_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

// Outputs of an earlier pipeline stage; their absence is a state problem.
nlohmann::json load_artifact(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) {
    fail(ErrorKind::State, path.string() + " does not exist; run `vdup " + producer + "` first");
  }
  return load_json(path);
}

std::optional<FrameRepr> parse_repr_flag(const std::string& text) {
  if (text == "auto") return std::nullopt;
  return parse_frame_repr(text);
}

ExtractorSpec corpus_extractor(const CorpusStore& store) {
  const auto id = store.manifest().extractor_id;
  if (id.empty()) fail(ErrorKind::State, "corpus has no frame features; run `vdup ingest --extract` or --features");
  return ExtractorSpec::from_id(id);
}

std::vector<std::vector<FeatureVector>> reference_descriptors(const fs::path& dir, const ExtractorSpec& spec) {
  if (!fs::is_directory(dir)) fail(ErrorKind::NotFound, dir.string() + " is not a directory");
  std::vector<fs::path> images;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") images.push_back(e.path());
  }
  std::sort(images.begin(), images.end());
  if (images.empty()) fail(ErrorKind::Validation, "no PNG images in " + dir.string());
  std::vector<std::vector<FeatureVector>> out;
  out.reserve(images.size());
  for (const auto& p : images) out.push_back(extract(to_gray(read_png(p)), spec));
  return out;
}

class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "vdup-XXXXXX").string();
    if (!mkdtemp(pattern.data())) fail(ErrorKind::Io, "cannot create a temporary directory");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
  std::string video;
  std::string report;
  std::string app;
  std::string features;
  std::string ocr_text;
  std::string ocr_command;
  std::string extract;
  std::string decoder = "ffmpeg";
  std::string decoder_command = kDefaultDecoderCommand;
  int fps = 5;
  int max_frames = 0;
  int grid = 8;
  int bins = 8;
  int descriptors = 10;
  int patch = 16;
};

int cmd_ingest(const Global& g, const IngestArgs& a) {
  CorpusStore store(g.root);
  std::vector<std::string> touched;
  auto note = [&](const std::string& id) {
    if (std::find(touched.begin(), touched.end(), id) == touched.end()) touched.push_back(id);
  };
  auto need_report = [&](const char* flag) -> std::string {
    if (a.report.empty()) fail(ErrorKind::Validation, std::string(flag) + " needs --report");
    return a.report;
  };

  if (!a.video.empty()) {
    if (a.app.empty()) fail(ErrorKind::Validation, "--video needs --app");
    IngestionConfig cfg;
    cfg.fps = a.fps;
    cfg.decoder = a.decoder;
    cfg.decoder_command = a.decoder_command;
    if (a.max_frames > 0) cfg.max_frames = a.max_frames;
    cfg.validate();
    const std::string id = a.report.empty() ? fs::path(a.video).stem().string() : a.report;
    if (store.contains(id)) fail(ErrorKind::DuplicateId, "report '" + id + "' already exists");
    TempDir tmp;
    store_sampled_report(store, sample_frames(a.video, tmp.path(), cfg, id, a.app));
    note(id);
  }
  if (!a.features.empty()) {
    const auto id = need_report("--features");
    print_warnings(import_features(store, id, a.features).warnings);
    note(id);
  }
  if (!a.ocr_text.empty()) {
    const auto id = need_report("--ocr-text");
    print_warnings(import_ocr_text(store, id, a.ocr_text).warnings);
    note(id);
  }

  // Command-driven steps run on one report or on every report (of --app).
  std::vector<std::string> targets;
  if (!a.report.empty()) {
    targets.push_back(a.report);
  } else {
    for (const auto& e : store.manifest().reports) {
      if (a.app.empty() || e.app_id == a.app) targets.push_back(e.report_id);
    }
  }
  if (!a.ocr_command.empty()) {
    for (const auto& id : targets) {
      store.replace_report(run_ocr(store.read_report(id), store, a.ocr_command));
      note(id);
    }
  }
  if (!a.extract.empty()) {
    ExtractorSpec spec;
    spec.mode = parse_feature_mode(a.extract);
    spec.grid = a.grid;
    spec.bins = a.bins;
    spec.descriptor_cap = a.descriptors;
    spec.patch = a.patch;
    spec.validate();
    for (const auto& id : targets) {
      extract_report_features(store, id, spec);
      note(id);
    }
  }
  if (touched.empty()) {
    fail(ErrorKind::Validation, "nothing to ingest: pass --video, --features, --ocr-text, --ocr-command or --extract");
  }
  for (const auto& id : touched) {
    const auto r = store.read_report(id);
    std::printf("%s frames=%zu mode=%s dim=%lld\n", id.c_str(), r.frames.size(),
                std::string(to_string(r.mode)).c_str(), static_cast<long long>(feature_dim(r)));
  }
  return 0;
}

// ---- train-codebook / build-idf / index-text -------------------------------

struct CodebookArgs {
  Eigen::Index k = 1000;
  std::size_t sample_size = 0;
  int max_iters = 100;
  double tol = 1e-4;
  std::string reference;
  std::string app;
  std::string out;
};

int cmd_train_codebook(const Global& g, const CodebookArgs& a) {
  CorpusStore store(g.root);
  const auto spec_id = store.manifest().extractor_id;
  std::vector<FeatureVector> features;
  if (!a.reference.empty()) {
    for (auto& doc : reference_descriptors(a.reference, corpus_extractor(store))) {
      features.insert(features.end(), doc.begin(), doc.end());
    }
  } else {
    for (const auto& r : store.read_all(a.app)) {
      if (!has_complete_features(r)) fail(ErrorKind::State, "report '" + r.report_id + "' has no frame features");
      for (const auto& f : r.frames) features.insert(features.end(), f.vectors.begin(), f.vectors.end());
    }
  }
  if (features.empty()) fail(ErrorKind::State, "no feature vectors to cluster");
  features = sample_features(features, a.sample_size, g.seed);
  CodebookTrainingOptions opts;
  opts.k = a.k;
  opts.seed = g.seed;
  opts.max_iters = a.max_iters;
  opts.tol = a.tol;
  opts.extractor_id = spec_id;
  std::vector<double> history;
  const auto codebook = train_codebook(features, opts, &history);
  const auto out = artifact(a.out, g, "codebook.json");
  atomic_write(out, to_json(codebook).dump() + "\n");
  std::printf("codebook k=%lld dim=%lld vectors=%zu iterations=%zu inertia=%.6g -> %s\n",
              static_cast<long long>(codebook.k()), static_cast<long long>(codebook.dim()), features.size(),
              history.empty() ? std::size_t{0} : history.size() - 1, history.empty() ? 0.0 : history.back(),
              out.string().c_str());
  return 0;
}

struct IdfArgs {
  std::string codebook;
  std::string reference;
  std::string app;
  std::string out;
};

int cmd_build_idf(const Global& g, const IdfArgs& a) {
  CorpusStore store(g.root);
  const auto codebook = codebook_from_json(load_artifact(artifact(a.codebook, g, "codebook.json"), "train-codebook"));
  if (codebook.extractor_id != store.manifest().extractor_id) {
    fail(ErrorKind::State, "codebook was trained on '" + codebook.extractor_id + "' features but the corpus uses '" +
                               store.manifest().extractor_id + "'");
  }
  std::vector<std::vector<TermId>> docs;
  if (!a.reference.empty()) {
    for (const auto& doc : reference_descriptors(a.reference, corpus_extractor(store))) {
      docs.push_back(assign_words(doc, codebook));
    }
  } else {
    // Without a reference collection every corpus frame is one document.
    for (const auto& r : store.read_all(a.app)) {
      for (const auto& f : r.frames) {
        if (!f.vectors.empty()) docs.push_back(assign_words(f.vectors, codebook));
      }
    }
  }
  if (docs.empty()) fail(ErrorKind::State, "no documents to count");
  const auto idf = build_idf(docs);
  const auto out = artifact(a.out, g, "idf.json");
  atomic_write(out, to_json(idf).dump() + "\n");
  std::printf("idf N=%lld words=%zu -> %s\n", static_cast<long long>(idf.doc_count), idf.df.size(),
              out.string().c_str());
  return 0;
}

struct TextArgs {
  std::string strategy = "all_text";
  std::string app;
  std::string out;
};

int cmd_index_text(const Global& g, const TextArgs& a) {
  CorpusStore store(g.root);
  const auto strategy = parse_doc_strategy(a.strategy);
  std::vector<TextDocument> docs;
  for (const auto& r : store.read_all(a.app)) docs.push_back(make_document(r, strategy));
  const auto index = build_text_index(docs, strategy);
  const auto out = artifact(a.out, g, "text_index.json");
  atomic_write(out, to_json(index).dump() + "\n");
  std::printf("text index N=%lld terms=%zu strategy=%s -> %s\n", static_cast<long long>(index.doc_count),
              index.df.size(), std::string(to_string(strategy)).c_str(), out.string().c_str());
  return 0;
}

// ---- gen-tasks --------------------------------------------------------------

struct TaskArgs {
  std::string dataset;
  std::string app;
  std::string out;
};

Dataset load_dataset(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorKind::NotFound, path.string() + " does not exist");
  return dataset_from_json(load_json(path));
}

int cmd_gen_tasks(const Global& g, const TaskArgs& a) {
  const auto dataset = load_dataset(artifact(a.dataset, g, "dataset.json"));
  std::vector<DetectionTask> tasks;
  for (const auto& app : dataset.apps) {
    if (!a.app.empty() && app.app_id != a.app) continue;
    std::vector<std::string> warnings;
    auto app_tasks = generate_tasks(app, g.seed, &warnings);
    print_warnings(warnings);
    std::printf("%s tasks=%zu\n", app.app_id.c_str(), app_tasks.size());
    tasks.insert(tasks.end(), app_tasks.begin(), app_tasks.end());
  }
  if (tasks.empty()) fail(ErrorKind::Validation, "no app matched '" + a.app + "'");
  const auto out = artifact(a.out, g, "tasks.jsonl");
  atomic_write(out, tasks_to_jsonl(tasks));
  std::printf("wrote %zu tasks -> %s\n", tasks.size(), out.string().c_str());
  return 0;
}

// ---- query ------------------------------------------------------------------

struct QueryArgs {
  std::string id;
  std::size_t top = 5;
  std::string config = "BoVW";
  double w = 0.2;
  double tau = 0.7;
  std::string mode = "auto";
  double va_threshold = 0.128;
  std::string denominator = "printed";
  std::string frame_repr = "auto";
  std::string codebook;
  std::string idf;
  std::string text_index;
  std::string dataset;
  std::string out;
  std::string dump_lcs;
};

nlohmann::json lcs_json(const LcsResult& r) {
  return {{"overlap", r.overlap}, {"end_i", r.end_i}, {"end_j", r.end_j}, {"length", r.length}};
}

int cmd_query(const Global& g, const QueryArgs& a) {
  CorpusStore store(g.root);
  if (!store.contains(a.id)) fail(ErrorKind::NotFound, "unknown report '" + a.id + "'");
  auto codebook = codebook_from_json(load_artifact(artifact(a.codebook, g, "codebook.json"), "train-codebook"));
  auto idf = idf_from_json(load_artifact(artifact(a.idf, g, "idf.json"), "build-idf"));
  auto text_index = text_index_from_json(load_artifact(artifact(a.text_index, g, "text_index.json"), "index-text"));

  const auto query = store.read_report(a.id);
  if (!has_complete_features(query)) fail(ErrorKind::State, "report '" + a.id + "' has no frame features");
  if (!make_document(query, text_index.strategy).tokens.empty() && !text_index.doc_len.count(a.id)) {
    fail(ErrorKind::State, "report '" + a.id + "' is not in the text index; rerun `vdup index-text`");
  }

  FusionConfig fusion;
  fusion.w = a.w;
  fusion.visual = parse_visual_config(a.config);
  fusion.selective = a.mode == "auto";
  fusion.va_threshold = a.va_threshold;
  fusion.validate();

  EngineConfig ec;
  ec.strategy = text_index.strategy;
  ec.tau = a.tau;
  ec.frame_repr = parse_repr_flag(a.frame_repr);
  ec.denominator = parse_wlcs_denominator(a.denominator);
  const SimilarityEngine engine(store.read_all(query.app_id), std::move(codebook), std::move(idf), ec,
                                std::move(text_index));

  FusionMode mode = FusionMode::Combined;
  if (a.mode != "auto") {
    mode = parse_fusion_mode(a.mode);
  } else {
    const auto dataset_path = artifact(a.dataset, g, "dataset.json");
    const Dataset::App* app = nullptr;
    Dataset dataset;
    if (fs::exists(dataset_path)) {
      dataset = load_dataset(dataset_path);
      app = dataset.find(query.app_id);
    }
    std::vector<std::pair<std::string, std::string>> dups, nondups;
    if (app) {
      auto known = [&](const auto& p) { return engine.contains(p.first) && engine.contains(p.second); };
      for (const auto& p : dataset.duplicate_pairs(*app)) {
        if (known(p)) dups.push_back(p);
      }
      for (const auto& p : dataset.non_duplicate_pairs(*app)) {
        if (known(p)) nondups.push_back(p);
      }
    }
    if (dups.empty() || nondups.empty()) {
      std::cerr << "note: no labelled pairs for app '" << query.app_id << "', using combined mode\n";
    } else {
      const auto sel = engine.select_mode(dups, nondups, fusion.va_threshold);
      mode = sel.mode;
      std::fprintf(stderr, "mode %s (V_dup=%.4f V_nondup=%.4f)\n", std::string(to_string(mode)).c_str(), sel.v_dup,
                   sel.v_nondup);
    }
  }

  std::vector<std::string> corpus;
  for (const auto& id : engine.ids()) {
    if (id != a.id) corpus.push_back(id);
  }
  const auto result = engine.rank(a.id, corpus, fusion, mode);
  for (std::size_t i = 0; i < result.entries.size() && i < a.top; ++i) {
    const auto& e = result.entries[i];
    std::printf("%zu\t%s\ts_final=%.6f\ts_vis=%.6f\ts_txt=%.6f\n", i + 1, e.id.c_str(), e.s_final, e.s_vis, e.s_txt);
  }
  const auto out = artifact(a.out, g, fs::path("results") / (a.id + ".json"));
  fs::create_directories(out.parent_path());
  atomic_write(out, to_json(result).dump(2) + "\n");

  if (!a.dump_lcs.empty()) {
    auto traces = nlohmann::json::array();
    for (const auto& e : result.entries) {
      const auto s = engine.pair_scores(a.id, e.id, true);
      traces.push_back({{"candidate", e.id},
                        {"f_lcs", lcs_json(s.f)},
                        {"w_lcs", lcs_json(s.w)},
                        {"f_lcs_normalized", s.flcs},
                        {"w_lcs_normalized", s.wlcs}});
    }
    atomic_write(a.dump_lcs, nlohmann::json{{"query", a.id}, {"tau", a.tau}, {"pairs", traces}}.dump(2) + "\n");
  }
  return 0;
}

// ---- evaluate ---------------------------------------------------------------

struct EvalArgs {
  std::string dataset;
  std::string tasks;
  std::vector<std::string> grid;
  int fps = 0;
  Eigen::Index k = 50;
  std::string config = "BoVW";
  std::string strategy = "all_text";
  double w = 0.2;
  double tau = 0.7;
  bool no_selective = false;
  double va_threshold = 0.128;
  std::string denominator = "printed";
  std::string frame_repr = "auto";
  std::size_t sample_size = 0;
  int max_iters = 100;
  std::string codebook;
  std::string idf;
  std::string reference;
  bool codebook_from_reference = false;
  std::string csv;
  std::string json;
};

int cmd_evaluate(const Global& g, const EvalArgs& a) {
  CorpusStore store(g.root);
  const auto dataset = load_dataset(artifact(a.dataset, g, "dataset.json"));
  const auto tasks_path = artifact(a.tasks, g, "tasks.jsonl");
  if (!fs::exists(tasks_path)) fail(ErrorKind::NotFound, tasks_path.string() + " does not exist");
  const auto tasks = tasks_from_jsonl(read_file(tasks_path));

  GridPoint base;
  base.fps = a.fps;
  base.k = a.k;
  base.visual = parse_visual_config(a.config);
  base.strategy = parse_doc_strategy(a.strategy);
  base.w = a.w;
  base.tau = a.tau;

  EvaluationOptions opts;
  opts.grid = expand_grid(a.grid, base);
  opts.seed = g.seed;
  opts.jobs = g.jobs;
  opts.selective = !a.no_selective;
  opts.va_threshold = a.va_threshold;
  opts.denominator = parse_wlcs_denominator(a.denominator);
  opts.frame_repr = parse_repr_flag(a.frame_repr);
  opts.sample_size = a.sample_size;
  opts.max_iters = a.max_iters;
  if (!a.codebook.empty()) opts.codebook = codebook_from_json(load_json(a.codebook));
  if (!a.idf.empty()) opts.idf = idf_from_json(load_json(a.idf));
  if (!a.reference.empty()) opts.reference = reference_descriptors(a.reference, corpus_extractor(store));
  opts.codebook_from_reference = a.codebook_from_reference;
  if (opts.codebook_from_reference && opts.reference.empty()) {
    fail(ErrorKind::Validation, "--codebook-from-reference needs --reference");
  }

  const auto reports = store.read_all();
  const auto report = run_evaluation(reports, dataset, tasks, opts);
  print_warnings(report.warnings);

  const auto csv_path = artifact(a.csv, g, fs::path("results") / "metrics.csv");
  const auto json_path = artifact(a.json, g, fs::path("results") / "metrics.json");
  fs::create_directories(csv_path.parent_path());
  fs::create_directories(json_path.parent_path());
  atomic_write(csv_path, to_csv(report));
  atomic_write(json_path, to_json(report).dump(2) + "\n");
  for (const auto& row : report.overall) {
    std::printf("%s tasks=%zu mRR=%.4f mAP=%.4f HIT@1=%.4f HIT@5=%.4f\n", row.config.c_str(),
                row.metrics.task_count, row.metrics.mrr, row.metrics.map, row.metrics.hit_rate[0],
                row.metrics.hit_rate[4]);
  }
  std::printf("-> %s\n", csv_path.string().c_str());
  return 0;
}

// ---- synth ------------------------------------------------------------------

int cmd_synth(const Global& g, SynthSpec spec) {
  spec.seed = g.seed;
  const auto out = synth_corpus(spec, g.root);
  std::size_t reports = 0;
  for (const auto& app : out.dataset.apps) {
    for (const auto& bug : app.bugs) reports += bug.reports.size();
  }
  std::printf("synthetic corpus apps=%zu reports=%zu reference_images=%zu -> %s\n", out.dataset.apps.size(), reports,
              out.reference_images.size(), g.root.c_str());
  return 0;
}

// ---- argument plumbing ------------------------------------------------------

/// Expands --config-file into ordinary arguments placed right after the
/// subcommand. Keys given on the command line are skipped, so flags win.
std::vector<std::string> with_config(std::vector<std::string> args) {
  std::string file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config-file" && i + 1 < args.size()) file = args[i + 1];
    if (args[i].rfind("--config-file=", 0) == 0) file = args[i].substr(14);
  }
  if (file.empty()) return args;
  const auto config = load_json(file);
  if (!config.is_object()) fail(ErrorKind::Parse, file + ": expected a JSON object");

  auto sub = std::find_first_of(args.begin(), args.end(), kSubcommands.begin(), kSubcommands.end());
  nlohmann::json merged = nlohmann::json::object();
  for (const auto& [key, value] : config.items()) {
    if (!value.is_object()) merged[key] = value;
  }
  if (sub != args.end() && config.contains(*sub) && config[*sub].is_object()) {
    for (const auto& [key, value] : config[*sub].items()) merged[key] = value;
  }

  std::vector<std::string> injected;
  for (const auto& [key, value] : merged.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin() + 2, flag.end(), '_', '-');
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& s) {
      return s == flag || s.rfind(flag + "=", 0) == 0;
    });
    if (given || flag == "--config-file") continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) injected.push_back(flag);
    } else if (value.is_array()) {
      injected.push_back(flag);
      for (const auto& v : value) injected.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    } else {
      injected.push_back(flag);
      injected.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  const auto at = sub == args.end() ? args.end() : sub + 1;
  args.insert(at, injected.begin(), injected.end());
  return args;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Duplicate detection for video-based bug reports"};
  app.name("vdup");
  app.require_subcommand(1);

  Global g;
  if (const char* env = std::getenv("VDUP_ROOT")) g.root = env;
  if (g.root.empty()) g.root = ".";
  app.add_option("--root", g.root, "Corpus root directory (default: $VDUP_ROOT or .)");
  app.add_option("--seed", g.seed, "Seed for every randomized step")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads for evaluation")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--config-file", g.config_file,
                 "JSON file of flag values, top-level or per subcommand; command-line flags win");

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Add a video, attach features or OCR text, or run the built-in extractor");
  ingest->add_option("--video", ia.video, "Screen recording to sample into frames");
  ingest->add_option("--report", ia.report, "Report id (default for --video: file stem)");
  ingest->add_option("--app", ia.app, "App id of a new report; limits --extract/--ocr-command otherwise");
  ingest->add_option("--fps", ia.fps, "Sampling rate for --video")->capture_default_str();
  ingest->add_option("--max-frames", ia.max_frames, "Keep at most this many sampled frames (0: all)");
  ingest->add_option("--decoder", ia.decoder, "Decoder executable")->capture_default_str();
  ingest->add_option("--decoder-command", ia.decoder_command,
                     "Decoder command template with {decoder} {input} {fps} {outdir}")
      ->capture_default_str();
  ingest->add_option("--features", ia.features, "Feature JSONL file for --report");
  ingest->add_option("--ocr-text", ia.ocr_text, "OCR JSONL file for --report");
  ingest->add_option("--ocr-command", ia.ocr_command, "OCR command template with {image}; stdout becomes frame text");
  ingest->add_option("--extract", ia.extract, "Run the built-in extractor: single or multi")
      ->check(CLI::IsMember({"single", "multi"}));
  ingest->add_option("--grid", ia.grid, "Single mode grid size")->capture_default_str();
  ingest->add_option("--bins", ia.bins, "Multi mode orientation bins")->capture_default_str();
  ingest->add_option("--descriptors", ia.descriptors, "Multi mode descriptors per frame")->capture_default_str();
  ingest->add_option("--patch", ia.patch, "Multi mode patch size")->capture_default_str();

  CodebookArgs ca;
  auto* train = app.add_subcommand("train-codebook", "Cluster frame features into k visual words");
  train->add_option("--k", ca.k, "Number of visual words")->capture_default_str();
  train->add_option("--sample-size", ca.sample_size, "Random subsample of vectors (0: all)")->capture_default_str();
  train->add_option("--max-iters", ca.max_iters, "Lloyd iteration cap")->capture_default_str();
  train->add_option("--tol", ca.tol, "Stop when no centroid moves more than this")->capture_default_str();
  train->add_option("--reference", ca.reference, "Directory of PNG images to train on instead of corpus frames");
  train->add_option("--app", ca.app, "Only use frames of this app");
  train->add_option("--out", ca.out, "Output file (default: <root>/codebook.json)");

  IdfArgs da;
  auto* idf = app.add_subcommand("build-idf", "Count visual-word document frequencies");
  idf->add_option("--codebook", da.codebook, "Codebook file (default: <root>/codebook.json)");
  idf->add_option("--reference", da.reference, "Directory of PNG images, one document each (default: corpus frames)");
  idf->add_option("--app", da.app, "Only use frames of this app");
  idf->add_option("--out", da.out, "Output file (default: <root>/idf.json)");

  TextArgs ta;
  auto* text = app.add_subcommand("index-text", "Build the textual TF-IDF index");
  text->add_option("--strategy", ta.strategy, "all_text, unique_frames or unique_words")->capture_default_str();
  text->add_option("--app", ta.app, "Only index reports of this app");
  text->add_option("--out", ta.out, "Output file (default: <root>/text_index.json)");

  TaskArgs ka;
  auto* gen = app.add_subcommand("gen-tasks", "Enumerate duplicate detection tasks from a dataset grouping");
  gen->add_option("--dataset", ka.dataset, "Dataset file (default: <root>/dataset.json)");
  gen->add_option("--app", ka.app, "Only this app");
  gen->add_option("--out", ka.out, "Output JSONL (default: <root>/tasks.jsonl)");

  QueryArgs qa;
  auto* query = app.add_subcommand("query", "Rank the corpus against one report");
  query->add_option("--id", qa.id, "Query report id")->required();
  query->add_option("--top", qa.top, "Lines to print")->capture_default_str();
  query->add_option("--config", qa.config, "BoVW, f-LCS, w-LCS, B+f-LCS or B+w-LCS")->capture_default_str();
  query->add_option("--w", qa.w, "Textual weight in [0,1]")->capture_default_str();
  query->add_option("--tau", qa.tau, "Frame match threshold for LCS")->capture_default_str();
  query->add_option("--mode", qa.mode, "auto, combined or visual_only")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "combined", "visual_only"}));
  query->add_option("--va-threshold", qa.va_threshold, "Vocabulary agreement gap for combined mode")
      ->capture_default_str();
  query->add_option("--wlcs-denominator", qa.denominator, "printed or end-aligned")->capture_default_str();
  query->add_option("--frame-repr", qa.frame_repr, "auto, raw or bovw")->capture_default_str();
  query->add_option("--codebook", qa.codebook, "Codebook file (default: <root>/codebook.json)");
  query->add_option("--idf", qa.idf, "IDF file (default: <root>/idf.json)");
  query->add_option("--text-index", qa.text_index, "Text index file (default: <root>/text_index.json)");
  query->add_option("--dataset", qa.dataset, "Dataset file used by --mode auto (default: <root>/dataset.json)");
  query->add_option("--out", qa.out, "Result JSON (default: <root>/results/<id>.json)");
  query->add_option("--dump-lcs", qa.dump_lcs, "Write per-candidate LCS traces to this JSON file");

  EvalArgs ea;
  auto* eval = app.add_subcommand("evaluate", "Run the configuration grid over every task");
  eval->add_option("--dataset", ea.dataset, "Dataset file (default: <root>/dataset.json)");
  eval->add_option("--tasks", ea.tasks, "Tasks JSONL (default: <root>/tasks.jsonl)");
  eval->add_option("--grid", ea.grid, "Axes such as fps=1,5 k=100,500 vis=BoVW,B+w-LCS strategy=all_text w=0,0.2 tau=0.7");
  eval->add_option("--fps", ea.fps, "Sampling rate (0: as stored)")->capture_default_str();
  eval->add_option("--k", ea.k, "Visual words")->capture_default_str();
  eval->add_option("--config", ea.config, "Visual configuration")->capture_default_str();
  eval->add_option("--strategy", ea.strategy, "Textual document strategy")->capture_default_str();
  eval->add_option("--w", ea.w, "Textual weight")->capture_default_str();
  eval->add_option("--tau", ea.tau, "Frame match threshold")->capture_default_str();
  eval->add_flag("--no-selective", ea.no_selective, "Always combine text, skipping the vocabulary agreement check");
  eval->add_option("--va-threshold", ea.va_threshold, "Vocabulary agreement gap for combined mode")
      ->capture_default_str();
  eval->add_option("--wlcs-denominator", ea.denominator, "printed or end-aligned")->capture_default_str();
  eval->add_option("--frame-repr", ea.frame_repr, "auto, raw or bovw")->capture_default_str();
  eval->add_option("--sample-size", ea.sample_size, "Codebook training subsample (0: all)")->capture_default_str();
  eval->add_option("--max-iters", ea.max_iters, "Lloyd iteration cap")->capture_default_str();
  eval->add_option("--codebook", ea.codebook, "Fixed codebook instead of training one per configuration");
  eval->add_option("--idf", ea.idf, "Fixed IDF table");
  eval->add_option("--reference", ea.reference, "Directory of PNG images used as IDF documents");
  eval->add_flag("--codebook-from-reference", ea.codebook_from_reference, "Train codebooks on --reference images");
  eval->add_option("--csv", ea.csv, "Metrics CSV (default: <root>/results/metrics.csv)");
  eval->add_option("--json", ea.json, "Metrics JSON (default: <root>/results/metrics.json)");

  SynthSpec sa;
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus of screen recordings");
  synth->add_option("--apps", sa.apps, "Apps")->capture_default_str();
  synth->add_option("--bugs", sa.bugs, "Bugs per app")->capture_default_str();
  synth->add_option("--videos", sa.videos_per_bug, "Videos per bug")->capture_default_str();
  synth->add_option("--frames", sa.frames_per_video, "Frames per video")->capture_default_str();
  synth->add_option("--shared-ratio", sa.shared_frame_ratio, "Fraction of frames duplicates share")
      ->capture_default_str();
  synth->add_option("--vocab-overlap", sa.vocab_overlap, "Fraction of bug vocabulary shared app-wide")
      ->capture_default_str();
  synth->add_option("--reference-images", sa.reference_images, "Reference images for IDF")->capture_default_str();
  synth->add_option("--width", sa.width, "Frame width")->capture_default_str();
  synth->add_option("--height", sa.height, "Frame height")->capture_default_str();
  synth->add_option("--fps", sa.fps, "Recorded sampling rate")->capture_default_str();
  synth->add_option("--pixel-noise", sa.pixel_noise, "Per-recording pixel jitter (0: shared frames are identical)")
      ->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = with_config(std::move(args));
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      return app.exit(e) == 0 ? 0 : kInputError;
    }
    if (ingest->parsed()) return cmd_ingest(g, ia);
    if (train->parsed()) return cmd_train_codebook(g, ca);
    if (idf->parsed()) return cmd_build_idf(g, da);
    if (text->parsed()) return cmd_index_text(g, ta);
    if (gen->parsed()) return cmd_gen_tasks(g, ka);
    if (query->parsed()) return cmd_query(g, qa);
    if (eval->parsed()) return cmd_evaluate(g, ea);
    if (synth->parsed()) return cmd_synth(g, sa);
  } catch (const Error& e) {
    std::cerr << "vdup: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::State ? kStateError : kInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "vdup: malformed JSON: " << e.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "vdup: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace vdup::cli
