#include "vdup/ingestion.hpp"

#include "vdup/error.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

namespace vdup {

using nlohmann::json;

void IngestionConfig::validate() const {
  if (fps < 1) fail(ErrorKind::Validation, "fps must be >= 1");
  if (decoder_command.find("{input}") == std::string::npos || decoder_command.find("{outdir}") == std::string::npos) {
    fail(ErrorKind::Validation, "decoder command must contain {input} and {outdir} placeholders");
  }
  if (max_frames && *max_frames < 1) fail(ErrorKind::Validation, "max_frames must be >= 1");
}

std::string expand_template(std::string text, const std::vector<std::pair<std::string, std::string>>& values) {
  for (const auto& [name, value] : values) {
    const std::string key = "{" + name + "}";
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
      text.replace(pos, key.size(), value);
      pos += value.size();
    }
  }
  return text;
}

std::string shell_quote(const std::string& text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out += "'";
  return out;
}

CommandResult run_command(const std::string& command) {
  char err_path[] = "/tmp/vdup-stderr-XXXXXX";
  const int fd = mkstemp(err_path);
  if (fd < 0) fail(ErrorKind::Io, "cannot create temporary file for command stderr");
  close(fd);

  CommandResult result;
  const std::string full = "{ " + command + " ; } 2>" + shell_quote(err_path);
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) {
    std::remove(err_path);
    fail(ErrorKind::Io, "cannot start command: " + command);
  }
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) result.out.append(buf, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
  {
    std::ifstream in(err_path, std::ios::binary);
    result.err.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  std::remove(err_path);
  return result;
}

VideoReport sample_frames(const std::filesystem::path& video, const std::filesystem::path& outdir,
                          const IngestionConfig& cfg, const std::string& report_id, const std::string& app_id) {
  cfg.validate();
  if (!std::filesystem::exists(video)) fail(ErrorKind::NotFound, "video not found: " + video.string());
  std::filesystem::create_directories(outdir);
  const std::string command = expand_template(cfg.decoder_command, {{"decoder", cfg.decoder},
                                                                    {"input", shell_quote(video.string())},
                                                                    {"outdir", shell_quote(outdir.string())},
                                                                    {"fps", std::to_string(cfg.fps)}});
  const CommandResult res = run_command(command);
  if (res.exit_code != 0) {
    fail(ErrorKind::Ingestion, "decoder failed on " + video.string() + " (exit " + std::to_string(res.exit_code) +
                                   "): " + res.err);
  }
  std::vector<std::filesystem::path> images;
  for (const auto& entry : std::filesystem::directory_iterator(outdir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") images.push_back(entry.path());
  }
  std::sort(images.begin(), images.end());
  if (cfg.max_frames && images.size() > static_cast<std::size_t>(*cfg.max_frames)) {
    images.resize(static_cast<std::size_t>(*cfg.max_frames));
  }
  if (images.empty()) fail(ErrorKind::EmptyVideo, "decoder produced no frames for " + video.string());

  VideoReport report;
  report.report_id = report_id;
  report.app_id = app_id;
  report.fps = cfg.fps;
  for (std::size_t i = 0; i < images.size(); ++i) {
    FrameRecord f;
    f.index = static_cast<int>(i);
    f.image_path = std::filesystem::absolute(images[i]).string();
    report.frames.push_back(std::move(f));
  }
  return report;
}

namespace {

json parse_line(const std::string& line, std::size_t line_no, const std::string& what) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, what + " line " + std::to_string(line_no) + ": " + e.what());
  }
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

std::map<int, std::size_t> frame_slots(const VideoReport& report) {
  std::map<int, std::size_t> slots;
  for (std::size_t i = 0; i < report.frames.size(); ++i) slots[report.frames[i].index] = i;
  return slots;
}

}  // namespace

ImportResult apply_features(VideoReport report, std::istream& in) {
  ImportResult result;
  std::string line;
  std::size_t line_no = 0;

  json header;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    header = parse_line(line, line_no, "features");
    break;
  }
  if (header.is_null()) fail(ErrorKind::Parse, "features: missing header line");
  FeatureMode mode;
  Eigen::Index dim;
  std::string extractor_id;
  try {
    mode = parse_feature_mode(header.at("mode").get<std::string>());
    dim = header.at("dim").get<Eigen::Index>();
    extractor_id = header.at("extractor_id").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, "features line " + std::to_string(line_no) + " (header): " + e.what());
  }
  if (mode == FeatureMode::None) fail(ErrorKind::Validation, "features header: mode must be single or multi");
  if (dim < 1) fail(ErrorKind::Validation, "features header: dim must be positive");

  const auto slots = frame_slots(report);
  std::map<int, std::vector<FeatureVector>> incoming;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const json j = parse_line(line, line_no, "features");
    const std::string at = "features line " + std::to_string(line_no) + ": ";
    int frame;
    std::vector<std::vector<double>> raw;
    try {
      frame = j.at("frame").get<int>();
      raw = j.at("vectors").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
      fail(ErrorKind::Parse, at + e.what());
    }
    if (!slots.count(frame)) {
      fail(ErrorKind::Validation, at + "unknown frame index " + std::to_string(frame) + " for report '" +
                                      report.report_id + "'");
    }
    if (raw.empty()) fail(ErrorKind::Validation, at + "frame " + std::to_string(frame) + " has no vectors");
    if (mode == FeatureMode::Single && raw.size() != 1) {
      fail(ErrorKind::Validation, at + "single-vector mode expects exactly one vector per frame");
    }
    if (raw.size() > kMaxDescriptorsPerFrame) {
      fail(ErrorKind::Validation, at + "frame " + std::to_string(frame) + " has " + std::to_string(raw.size()) +
                                      " vectors; at most 10 allowed");
    }
    std::vector<FeatureVector> vectors;
    for (const auto& values : raw) {
      if (static_cast<Eigen::Index>(values.size()) != dim) {
        fail(ErrorKind::Validation, at + "vector dimension " + std::to_string(values.size()) +
                                        " does not match header dim " + std::to_string(dim));
      }
      vectors.push_back(Eigen::Map<const FeatureVector>(values.data(), dim));
      if (!vectors.back().allFinite()) fail(ErrorKind::Validation, at + "non-finite feature value");
    }
    if (incoming.count(frame)) {
      result.warnings.push_back(at + "duplicate entry for frame " + std::to_string(frame) + "; last entry wins");
    }
    incoming[frame] = std::move(vectors);
  }

  for (auto& f : report.frames) f.vectors.clear();
  for (auto& [frame, vectors] : incoming) report.frames[slots.at(frame)].vectors = std::move(vectors);
  report.mode = mode;
  report.extractor_id = extractor_id;
  validate(report);
  result.report = std::move(report);
  return result;
}

ImportResult apply_ocr_text(VideoReport report, std::istream& in) {
  ImportResult result;
  const auto slots = frame_slots(report);
  std::map<int, std::string> incoming;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const json j = parse_line(line, line_no, "ocr");
    const std::string at = "ocr line " + std::to_string(line_no) + ": ";
    int frame;
    std::string text;
    try {
      frame = j.at("frame").get<int>();
      text = j.at("text").get<std::string>();
    } catch (const json::exception& e) {
      fail(ErrorKind::Parse, at + e.what());
    }
    if (!slots.count(frame)) fail(ErrorKind::Validation, at + "unknown frame index " + std::to_string(frame));
    if (incoming.count(frame)) {
      result.warnings.push_back(at + "duplicate entry for frame " + std::to_string(frame) + "; last entry wins");
    }
    incoming[frame] = std::move(text);
  }
  for (auto& f : report.frames) f.ocr_text = std::string();
  for (auto& [frame, text] : incoming) report.frames[slots.at(frame)].ocr_text = std::move(text);
  result.report = std::move(report);
  return result;
}

VideoReport run_ocr(VideoReport report, const CorpusStore& store, const std::string& command_template) {
  if (command_template.find("{image}") == std::string::npos) {
    fail(ErrorKind::Validation, "OCR command must contain an {image} placeholder");
  }
  for (auto& f : report.frames) {
    const auto image = store.resolve_image(report, f);
    const auto res = run_command(expand_template(command_template, {{"image", shell_quote(image.string())}}));
    if (res.exit_code != 0) {
      fail(ErrorKind::Ingestion, "OCR failed on " + image.string() + " (exit " + std::to_string(res.exit_code) +
                                     "): " + res.err);
    }
    std::string text = res.out;
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    f.ocr_text = std::move(text);
  }
  return report;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::NotFound, "cannot open " + path.string());
  return in;
}

}  // namespace

ImportResult import_features(CorpusStore& store, const std::string& report_id,
                             const std::filesystem::path& feature_file) {
  auto in = open_input(feature_file);
  ImportResult result = apply_features(store.read_report(report_id), in);
  store.replace_report(result.report);
  return result;
}

ImportResult import_ocr_text(CorpusStore& store, const std::string& report_id, const std::filesystem::path& text_file) {
  auto in = open_input(text_file);
  ImportResult result = apply_ocr_text(store.read_report(report_id), in);
  store.replace_report(result.report);
  return result;
}

VideoReport store_sampled_report(CorpusStore& store, VideoReport sampled) {
  if (store.contains(sampled.report_id)) {
    fail(ErrorKind::DuplicateId, "report '" + sampled.report_id + "' already exists");
  }
  const auto dir = store.frames_dir(sampled.app_id, sampled.report_id);
  std::filesystem::create_directories(dir);
  for (auto& f : sampled.frames) {
    if (!f.image_path) continue;
    char name[32];
    std::snprintf(name, sizeof name, "%06d.png", f.index);
    std::filesystem::copy_file(*f.image_path, dir / name, std::filesystem::copy_options::overwrite_existing);
    f.image_path = std::string("frames/") + name;
  }
  store.write_report(sampled);
  return sampled;
}

VideoReport extract_report_features(CorpusStore& store, const std::string& report_id, const ExtractorSpec& spec) {
  spec.validate();
  VideoReport report = store.read_report(report_id);
  for (auto& f : report.frames) {
    f.vectors = extract(to_gray(read_png(store.resolve_image(report, f))), spec);
  }
  report.mode = spec.mode;
  report.extractor_id = spec.id();
  store.replace_report(report);
  return report;
}

}  // namespace vdup
