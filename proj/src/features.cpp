#include "vdup/features.hpp"

#include "vdup/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>

namespace vdup {

std::string ExtractorSpec::id() const {
  if (mode == FeatureMode::Multi) return "builtin-multi-g" + std::to_string(patch) + "b" + std::to_string(bins);
  return "builtin-single-g" + std::to_string(grid);
}

ExtractorSpec ExtractorSpec::from_id(const std::string& id) {
  auto parse_int = [&](const std::string& s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      fail(ErrorKind::Validation, "unknown extractor id '" + id + "'");
    }
    return std::stoi(s);
  };
  const std::string single = "builtin-single-g";
  const std::string multi = "builtin-multi-g";
  ExtractorSpec spec;
  if (id.rfind(single, 0) == 0) {
    spec.mode = FeatureMode::Single;
    spec.grid = parse_int(id.substr(single.size()));
  } else if (id.rfind(multi, 0) == 0) {
    const std::string rest = id.substr(multi.size());
    const auto b = rest.find('b');
    if (b == std::string::npos) fail(ErrorKind::Validation, "unknown extractor id '" + id + "'");
    spec = multi_default();
    spec.patch = parse_int(rest.substr(0, b));
    spec.bins = parse_int(rest.substr(b + 1));
  } else {
    fail(ErrorKind::Validation, "unknown extractor id '" + id + "'");
  }
  spec.validate();
  return spec;
}

void ExtractorSpec::validate() const {
  if (grid < 1) fail(ErrorKind::Validation, "extractor grid must be >= 1");
  if (bins < 1) fail(ErrorKind::Validation, "extractor bins must be >= 1");
  if (patch < 2) fail(ErrorKind::Validation, "extractor patch size must be >= 2");
  if (descriptor_cap < 1 || descriptor_cap > static_cast<int>(kMaxDescriptorsPerFrame)) {
    fail(ErrorKind::Validation, "descriptor cap must be in [1, 10]");
  }
  if (mode == FeatureMode::None) fail(ErrorKind::Validation, "extractor mode must be single or multi");
}

FeatureVector extract_single(const GrayImage& image, int grid) {
  if (grid < 1) fail(ErrorKind::Validation, "extractor grid must be >= 1");
  const Eigen::Index h = image.rows();
  const Eigen::Index w = image.cols();
  if (h < grid || w < grid) {
    fail(ErrorKind::Extraction, "image " + std::to_string(w) + "x" + std::to_string(h) + " is smaller than the " +
                                    std::to_string(grid) + "x" + std::to_string(grid) + " grid");
  }
  FeatureVector v(static_cast<Eigen::Index>(grid) * grid);
  for (int r = 0; r < grid; ++r) {
    const Eigen::Index y0 = r * h / grid;
    const Eigen::Index y1 = (r + 1) * h / grid;
    for (int c = 0; c < grid; ++c) {
      const Eigen::Index x0 = c * w / grid;
      const Eigen::Index x1 = (c + 1) * w / grid;
      v[r * grid + c] = image.block(y0, x0, y1 - y0, x1 - x0).mean();
    }
  }
  const double n = v.norm();
  if (n > 0.0) v /= n;
  return v;
}

namespace {

FeatureVector orientation_histogram(const GrayImage& image, Eigen::Index y0, Eigen::Index x0, int size, int bins) {
  const Eigen::Index h = image.rows();
  const Eigen::Index w = image.cols();
  FeatureVector hist = FeatureVector::Zero(bins);
  const double two_pi = 2.0 * std::numbers::pi;
  for (Eigen::Index y = y0; y < y0 + size; ++y) {
    for (Eigen::Index x = x0; x < x0 + size; ++x) {
      const double gx = image(y, std::min(x + 1, w - 1)) - image(y, std::max<Eigen::Index>(x - 1, 0));
      const double gy = image(std::min(y + 1, h - 1), x) - image(std::max<Eigen::Index>(y - 1, 0), x);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx);
      if (angle < 0.0) angle += two_pi;
      const int bin = std::min(bins - 1, static_cast<int>(angle / (two_pi / bins)));
      hist[bin] += mag;
    }
  }
  const double n = hist.norm();
  if (n > 0.0) hist /= n;
  return hist;
}

}  // namespace

std::vector<FeatureVector> extract_multi(const GrayImage& image, const ExtractorSpec& spec) {
  spec.validate();
  const int p = spec.patch;
  const Eigen::Index rows = image.rows() / p;
  const Eigen::Index cols = image.cols() / p;
  if (rows == 0 || cols == 0) {
    fail(ErrorKind::Extraction, "image " + std::to_string(image.cols()) + "x" + std::to_string(image.rows()) +
                                    " is smaller than one " + std::to_string(p) + "x" + std::to_string(p) + " patch");
  }
  struct Patch {
    Eigen::Index y, x;
    double contrast;
  };
  std::vector<Patch> patches;
  patches.reserve(static_cast<std::size_t>(rows * cols));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto block = image.block(r * p, c * p, p, p);
      const double mean = block.mean();
      const double var = (block.array() - mean).square().mean();
      patches.push_back({r * p, c * p, std::sqrt(var)});
    }
  }
  // Row-major order is the tie-break, hence the stable sort.
  std::stable_sort(patches.begin(), patches.end(),
                   [](const Patch& a, const Patch& b) { return a.contrast > b.contrast; });
  const std::size_t keep = std::min<std::size_t>(patches.size(), static_cast<std::size_t>(spec.descriptor_cap));
  std::vector<FeatureVector> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.push_back(orientation_histogram(image, patches[i].y, patches[i].x, p, spec.bins));
  }
  return out;
}

std::vector<FeatureVector> extract(const GrayImage& image, const ExtractorSpec& spec) {
  if (spec.mode == FeatureMode::Multi) return extract_multi(image, spec);
  return {extract_single(image, spec.grid)};
}

}  // namespace vdup
