#pragma once

#include "vdup/image.hpp"
#include "vdup/types.hpp"

#include <string>
#include <vector>

namespace vdup {

/// Built-in deterministic frame descriptors.
///
/// Single mode averages grayscale intensity over a grid x grid partition and
/// L2-normalizes the result (64 values for the default 8x8 grid). Multi mode
/// scans non-overlapping 16x16 patches, keeps the `descriptor_cap` patches with
/// the highest intensity standard deviation and describes each with a
/// magnitude-weighted gradient orientation histogram.
struct ExtractorSpec {
  FeatureMode mode = FeatureMode::Single;
  int grid = 8;
  int bins = 8;
  int descriptor_cap = 10;
  int patch = 16;

  static ExtractorSpec single_default() { return {}; }
  static ExtractorSpec multi_default() { return {FeatureMode::Multi, 8, 8, 10, 16}; }

  /// `builtin-single-g8`, `builtin-multi-g16b8`, ...
  std::string id() const;
  static ExtractorSpec from_id(const std::string& id);

  void validate() const;
};

FeatureVector extract_single(const GrayImage& image, int grid = 8);
std::vector<FeatureVector> extract_multi(const GrayImage& image, const ExtractorSpec& spec);

/// Dispatches on `spec.mode`; always returns at least one vector.
std::vector<FeatureVector> extract(const GrayImage& image, const ExtractorSpec& spec);

}  // namespace vdup
