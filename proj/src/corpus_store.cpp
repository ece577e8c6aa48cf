#include "vdup/corpus_store.hpp"

#include "vdup/error.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace vdup {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* name, const std::string& context) {
  if (!j.is_object()) fail(ErrorKind::Parse, context + ": expected an object");
  auto it = j.find(name);
  if (it == j.end()) fail(ErrorKind::Parse, context + ": missing field '" + name + "'");
  return *it;
}

template <typename T>
T field_as(const json& j, const char* name, const std::string& context) {
  const json& v = field(j, name, context);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::Parse, context + ": field '" + name + "' has the wrong type");
  }
}

FeatureVector vector_from_json(const json& j, const std::string& context) {
  if (!j.is_array()) fail(ErrorKind::Parse, context + ": field 'vectors' must hold arrays of numbers");
  FeatureVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(ErrorKind::Parse, context + ": field 'vectors' contains a non-number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

}  // namespace

const ManifestEntry* CorpusManifest::find(const std::string& report_id) const {
  for (const auto& e : reports) {
    if (e.report_id == report_id) return &e;
  }
  return nullptr;
}

json to_json(const VideoReport& report) {
  json frames = json::array();
  for (const auto& f : report.frames) {
    json vectors = json::array();
    for (const auto& v : f.vectors) {
      json values = json::array();
      for (Eigen::Index i = 0; i < v.size(); ++i) values.push_back(v[i]);
      vectors.push_back(std::move(values));
    }
    frames.push_back({{"index", f.index},
                      {"image", f.image_path ? json(*f.image_path) : json(nullptr)},
                      {"vectors", std::move(vectors)},
                      {"ocr_text", f.ocr_text ? json(*f.ocr_text) : json(nullptr)}});
  }
  return {{"report_id", report.report_id},
          {"app_id", report.app_id},
          {"fps", report.fps},
          {"mode", std::string(to_string(report.mode))},
          {"extractor_id", report.extractor_id},
          {"frames", std::move(frames)}};
}

VideoReport report_from_json(const json& j) {
  const std::string ctx = "report.json";
  VideoReport r;
  r.report_id = field_as<std::string>(j, "report_id", ctx);
  r.app_id = field_as<std::string>(j, "app_id", ctx);
  r.fps = field_as<int>(j, "fps", ctx);
  if (j.contains("mode")) r.mode = parse_feature_mode(field_as<std::string>(j, "mode", ctx));
  if (j.contains("extractor_id")) r.extractor_id = field_as<std::string>(j, "extractor_id", ctx);
  const json& frames = field(j, "frames", ctx);
  if (!frames.is_array()) fail(ErrorKind::Parse, ctx + ": field 'frames' must be an array");
  for (std::size_t n = 0; n < frames.size(); ++n) {
    const json& fj = frames[n];
    const std::string fctx = ctx + " frames[" + std::to_string(n) + "]";
    FrameRecord f;
    f.index = field_as<int>(fj, "index", fctx);
    if (auto it = fj.find("image"); it != fj.end() && !it->is_null()) {
      if (!it->is_string()) fail(ErrorKind::Parse, fctx + ": field 'image' must be a string");
      f.image_path = it->get<std::string>();
    }
    if (auto it = fj.find("vectors"); it != fj.end()) {
      if (!it->is_array()) fail(ErrorKind::Parse, fctx + ": field 'vectors' must be an array");
      for (const auto& vj : *it) f.vectors.push_back(vector_from_json(vj, fctx));
    }
    if (auto it = fj.find("ocr_text"); it != fj.end() && !it->is_null()) {
      if (!it->is_string()) fail(ErrorKind::Parse, fctx + ": field 'ocr_text' must be a string");
      f.ocr_text = it->get<std::string>();
    }
    r.frames.push_back(std::move(f));
  }
  if (r.mode == FeatureMode::None && feature_dim(r) > 0) {
    // Older files without "mode": infer it.
    bool multi = std::any_of(r.frames.begin(), r.frames.end(), [](const FrameRecord& f) { return f.vectors.size() > 1; });
    r.mode = multi ? FeatureMode::Multi : FeatureMode::Single;
  }
  return r;
}

json to_json(const CorpusManifest& m) {
  json reports = json::array();
  for (const auto& e : m.reports) reports.push_back({{"report_id", e.report_id}, {"app_id", e.app_id}});
  return {{"format_version", m.format_version},
          {"app_id", m.app_id},
          {"extractor_id", m.extractor_id},
          {"created_at", m.created_at},
          {"reports", std::move(reports)}};
}

CorpusManifest manifest_from_json(const json& j) {
  const std::string ctx = "manifest.json";
  CorpusManifest m;
  m.format_version = field_as<int>(j, "format_version", ctx);
  if (m.format_version != CorpusManifest::kFormatVersion) {
    fail(ErrorKind::Parse, ctx + ": unsupported format_version " + std::to_string(m.format_version));
  }
  m.app_id = field_as<std::string>(j, "app_id", ctx);
  m.extractor_id = field_as<std::string>(j, "extractor_id", ctx);
  m.created_at = field_as<std::string>(j, "created_at", ctx);
  const json& reports = field(j, "reports", ctx);
  if (!reports.is_array()) fail(ErrorKind::Parse, ctx + ": field 'reports' must be an array");
  for (const auto& e : reports) {
    m.reports.push_back({field_as<std::string>(e, "report_id", ctx), field_as<std::string>(e, "app_id", ctx)});
  }
  return m;
}

void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) fail(ErrorKind::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::NotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string utc_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::atoll(epoch));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

CorpusStore::CorpusStore(fs::path root) : root_(std::move(root)) {}

CorpusManifest CorpusStore::manifest() const {
  const fs::path path = root_ / "manifest.json";
  if (!fs::exists(path)) {
    CorpusManifest m;
    m.created_at = utc_timestamp();
    return m;
  }
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, "manifest.json: " + std::string(e.what()));
  }
  return manifest_from_json(j);
}

void CorpusStore::save_manifest(const CorpusManifest& manifest) const {
  atomic_write(root_ / "manifest.json", to_json(manifest).dump(2) + "\n");
}

fs::path CorpusStore::report_dir(const std::string& app_id, const std::string& report_id) const {
  return root_ / app_id / report_id;
}

fs::path CorpusStore::frames_dir(const std::string& app_id, const std::string& report_id) const {
  return report_dir(app_id, report_id) / "frames";
}

fs::path CorpusStore::write_report_file(const VideoReport& report) const {
  const fs::path path = report_dir(report.app_id, report.report_id) / "report.json";
  atomic_write(path, to_json(report).dump(2) + "\n");
  return path;
}

fs::path CorpusStore::write_report(const VideoReport& report) {
  validate(report);
  CorpusManifest m = manifest();
  if (m.find(report.report_id)) {
    fail(ErrorKind::DuplicateId, "report '" + report.report_id + "' already exists in " + root_.string());
  }
  if (!report.extractor_id.empty()) {
    if (!m.extractor_id.empty() && m.extractor_id != report.extractor_id) {
      fail(ErrorKind::Validation, "report '" + report.report_id + "' uses extractor '" + report.extractor_id +
                                      "' but the corpus uses '" + m.extractor_id + "'");
    }
    m.extractor_id = report.extractor_id;
  }
  const fs::path path = write_report_file(report);
  m.reports.push_back({report.report_id, report.app_id});
  if (m.reports.size() == 1) {
    m.app_id = report.app_id;
  } else if (m.app_id != report.app_id) {
    m.app_id.clear();
  }
  save_manifest(m);
  return path;
}

fs::path CorpusStore::replace_report(const VideoReport& report) {
  validate(report);
  CorpusManifest m = manifest();
  const ManifestEntry* entry = m.find(report.report_id);
  if (!entry) fail(ErrorKind::NotFound, "report '" + report.report_id + "' not found");
  if (entry->app_id != report.app_id) {
    fail(ErrorKind::Validation, "report '" + report.report_id + "' cannot change app");
  }
  if (!report.extractor_id.empty() && m.extractor_id != report.extractor_id) {
    set_extractor(report.extractor_id, report.report_id);
  }
  return write_report_file(report);
}

VideoReport CorpusStore::read_report(const std::string& report_id) const {
  const CorpusManifest m = manifest();
  const ManifestEntry* entry = m.find(report_id);
  if (!entry) fail(ErrorKind::NotFound, "report '" + report_id + "' not found in " + root_.string());
  const fs::path path = report_dir(entry->app_id, report_id) / "report.json";
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  VideoReport r = report_from_json(j);
  validate(r);
  return r;
}

std::vector<VideoReport> CorpusStore::read_all(const std::string& app_id) const {
  std::vector<VideoReport> out;
  Eigen::Index dim = 0;
  for (const auto& e : manifest().reports) {
    if (!app_id.empty() && e.app_id != app_id) continue;
    VideoReport r = read_report(e.report_id);
    const Eigen::Index d = feature_dim(r);
    if (d > 0) {
      if (dim > 0 && d != dim) {
        fail(ErrorKind::Validation, "report '" + r.report_id + "' has dimension " + std::to_string(d) +
                                        ", corpus dimension is " + std::to_string(dim));
      }
      dim = d;
    }
    out.push_back(std::move(r));
  }
  return out;
}

bool CorpusStore::contains(const std::string& report_id) const { return manifest().find(report_id) != nullptr; }

fs::path CorpusStore::resolve_image(const VideoReport& report, const FrameRecord& frame) const {
  if (!frame.image_path) {
    fail(ErrorKind::Validation,
         "report '" + report.report_id + "' frame " + std::to_string(frame.index) + " has no image");
  }
  fs::path p(*frame.image_path);
  if (p.is_absolute()) return p;
  return report_dir(report.app_id, report.report_id) / p;
}

void CorpusStore::set_extractor(const std::string& extractor_id, const std::string& except_report) {
  CorpusManifest m = manifest();
  if (m.extractor_id == extractor_id) return;
  if (!m.extractor_id.empty()) {
    // Switching is only allowed while no other report carries vectors.
    for (const auto& e : m.reports) {
      if (e.report_id == except_report) continue;
      VideoReport r = read_report(e.report_id);
      if (feature_dim(r) > 0 && r.extractor_id != extractor_id) {
        fail(ErrorKind::Validation, "corpus already uses extractor '" + m.extractor_id + "' (report '" +
                                        r.report_id + "'); cannot mix with '" + extractor_id + "'");
      }
    }
  }
  m.extractor_id = extractor_id;
  save_manifest(m);
}

void CorpusStore::set_created_at(const std::string& timestamp) {
  CorpusManifest m = manifest();
  m.created_at = timestamp;
  save_manifest(m);
}

}  // namespace vdup
