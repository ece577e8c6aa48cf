#pragma once

#include "vdup/corpus_store.hpp"
#include "vdup/types.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace vdup::test {

namespace fs = std::filesystem;

/// Scratch directory removed on scope exit.
class Scratch {
 public:
  Scratch() {
    std::string pattern = (fs::temp_directory_path() / "vdup-test-XXXXXX").string();
    if (!mkdtemp(pattern.data())) std::abort();
    path_ = pattern;
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  Scratch(const Scratch&) = delete;
  Scratch& operator=(const Scratch&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline FeatureVector vec(std::initializer_list<double> values) {
  FeatureVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

/// Single-vector report, one frame per entry of `frames`.
inline VideoReport single_report(const std::string& id, const std::vector<FeatureVector>& frames,
                                 const std::string& app = "app") {
  VideoReport r;
  r.report_id = id;
  r.app_id = app;
  r.mode = frames.empty() ? FeatureMode::None : FeatureMode::Single;
  r.extractor_id = "test";
  for (std::size_t i = 0; i < frames.size(); ++i) {
    FrameRecord f;
    f.index = static_cast<int>(i);
    f.vectors.push_back(frames[i]);
    r.frames.push_back(std::move(f));
  }
  return r;
}

/// Report without features whose frames carry the given OCR texts.
inline VideoReport text_report(const std::string& id, const std::vector<std::string>& texts,
                               const std::string& app = "app") {
  VideoReport r;
  r.report_id = id;
  r.app_id = app;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    FrameRecord f;
    f.index = static_cast<int>(i);
    f.ocr_text = texts[i];
    r.frames.push_back(std::move(f));
  }
  return r;
}

inline std::string shell_run(const std::string& command, int* exit_code) {
  std::string out;
  FILE* p = popen((command + " 2>&1").c_str(), "r");
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int status = pclose(p);
  *exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

}  // namespace vdup::test
