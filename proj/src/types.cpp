#include "vdup/types.hpp"

#include "vdup/error.hpp"

#include <cmath>

namespace vdup {

bool FrameRecord::operator==(const FrameRecord& other) const {
  if (index != other.index || image_path != other.image_path || ocr_text != other.ocr_text ||
      vectors.size() != other.vectors.size()) {
    return false;
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != other.vectors[i].size() || vectors[i] != other.vectors[i]) return false;
  }
  return true;
}

std::string_view to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::None: return "none";
    case FeatureMode::Single: return "single";
    case FeatureMode::Multi: return "multi";
  }
  return "none";
}

FeatureMode parse_feature_mode(std::string_view text) {
  if (text == "none") return FeatureMode::None;
  if (text == "single") return FeatureMode::Single;
  if (text == "multi") return FeatureMode::Multi;
  fail(ErrorKind::Validation, "unknown feature mode '" + std::string(text) + "'");
}

Eigen::Index feature_dim(const VideoReport& report) {
  for (const auto& f : report.frames) {
    if (!f.vectors.empty()) return f.vectors.front().size();
  }
  return 0;
}

void validate(const VideoReport& report) {
  const std::string where = "report '" + report.report_id + "': ";
  if (report.report_id.empty()) fail(ErrorKind::Validation, "report_id must be nonempty");
  if (report.fps < 1) fail(ErrorKind::Validation, where + "fps must be positive");
  if (report.frames.empty()) fail(ErrorKind::Validation, where + "report has no frames");
  if (report.frames.front().index != 0) fail(ErrorKind::Validation, where + "frame indices must start at 0");

  const Eigen::Index dim = feature_dim(report);
  for (std::size_t i = 0; i < report.frames.size(); ++i) {
    const auto& frame = report.frames[i];
    const std::string at = where + "frame " + std::to_string(frame.index) + ": ";
    if (i > 0 && frame.index <= report.frames[i - 1].index) {
      fail(ErrorKind::Validation, at + "frame indices must be strictly increasing");
    }
    if (report.mode == FeatureMode::None && !frame.vectors.empty()) {
      fail(ErrorKind::Validation, at + "vectors present but report feature mode is none");
    }
    if (report.mode == FeatureMode::Single && frame.vectors.size() > 1) {
      fail(ErrorKind::Validation, at + "single-vector mode allows one vector per frame");
    }
    if (frame.vectors.size() > kMaxDescriptorsPerFrame) {
      fail(ErrorKind::Validation, at + "more than 10 descriptors");
    }
    for (const auto& v : frame.vectors) {
      if (v.size() == 0) fail(ErrorKind::Validation, at + "empty feature vector");
      if (v.size() != dim) {
        fail(ErrorKind::Validation, at + "vector dimension " + std::to_string(v.size()) + " differs from " +
                                        std::to_string(dim));
      }
      if (!v.allFinite()) fail(ErrorKind::Validation, at + "non-finite feature value");
    }
  }
}

bool has_complete_features(const VideoReport& report) {
  for (const auto& f : report.frames) {
    if (f.vectors.empty()) return false;
  }
  return !report.frames.empty();
}

VideoReport subsample(const VideoReport& report, int target_fps) {
  if (target_fps <= 0 || target_fps == report.fps) return report;
  if (target_fps > report.fps || report.fps % target_fps != 0) {
    fail(ErrorKind::Validation, "cannot resample report '" + report.report_id + "' from " +
                                    std::to_string(report.fps) + " fps to " + std::to_string(target_fps) + " fps");
  }
  const std::size_t step = static_cast<std::size_t>(report.fps / target_fps);
  VideoReport out = report;
  out.fps = target_fps;
  out.frames.clear();
  for (std::size_t i = 0; i < report.frames.size(); i += step) {
    FrameRecord f = report.frames[i];
    f.index = static_cast<int>(out.frames.size());
    out.frames.push_back(std::move(f));
  }
  return out;
}

}  // namespace vdup
