#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vdup {

/// Dense per-frame feature vector. Dimension is fixed per extractor.
using FeatureVector = Eigen::VectorXd;

enum class FeatureMode { None, Single, Multi };

constexpr std::size_t kMaxDescriptorsPerFrame = 10;

struct FrameRecord {
  int index = 0;
  std::optional<std::string> image_path;
  std::vector<FeatureVector> vectors;
  std::optional<std::string> ocr_text;

  bool operator==(const FrameRecord& other) const;
};

struct VideoReport {
  std::string report_id;
  std::string app_id;
  int fps = 1;
  std::vector<FrameRecord> frames;
  FeatureMode mode = FeatureMode::None;
  std::string extractor_id;

  bool operator==(const VideoReport& other) const = default;

  std::size_t size() const { return frames.size(); }
};

std::string_view to_string(FeatureMode mode);
FeatureMode parse_feature_mode(std::string_view text);

/// Common vector dimension, or 0 if the report carries no vectors.
Eigen::Index feature_dim(const VideoReport& report);

/// Throws a validation error if the report breaks any structural invariant:
/// nonempty frames, indices strictly increasing from 0, finite vectors of one
/// dimension, per-frame vector counts consistent with `mode`.
void validate(const VideoReport& report);

/// True when every frame carries at least one vector.
bool has_complete_features(const VideoReport& report);

/// Keeps every `step`-th frame and renumbers indices from 0.
VideoReport subsample(const VideoReport& report, int target_fps);

}  // namespace vdup
