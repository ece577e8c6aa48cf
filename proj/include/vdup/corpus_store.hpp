#pragma once

#include "vdup/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace vdup {

namespace fs = std::filesystem;

struct ManifestEntry {
  std::string report_id;
  std::string app_id;

  bool operator==(const ManifestEntry&) const = default;
};

struct CorpusManifest {
  static constexpr int kFormatVersion = 1;

  std::string app_id;  // empty when the corpus spans several apps
  std::string extractor_id;
  std::vector<ManifestEntry> reports;
  std::string created_at;
  int format_version = kFormatVersion;

  const ManifestEntry* find(const std::string& report_id) const;
};

// JSON conversions. Floats go through nlohmann's shortest round-trip printer,
// so values read back bit-exact.
nlohmann::json to_json(const VideoReport& report);
VideoReport report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CorpusManifest& manifest);
CorpusManifest manifest_from_json(const nlohmann::json& j);

/// Writes `content` to `path` via a temp file in the same directory + rename.
void atomic_write(const fs::path& path, const std::string& content);
std::string read_file(const fs::path& path);

/// Current UTC time as ISO-8601; honours SOURCE_DATE_EPOCH when set.
std::string utc_timestamp();

/// On-disk corpus rooted at one directory:
///   <root>/manifest.json
///   <root>/<app>/<report>/report.json
///   <root>/<app>/<report>/frames/%06d.png
/// Single writer per root; any number of readers.
class CorpusStore {
 public:
  explicit CorpusStore(fs::path root);

  const fs::path& root() const { return root_; }

  /// Loads the manifest, or returns a fresh one if the root has none yet.
  CorpusManifest manifest() const;

  fs::path report_dir(const std::string& app_id, const std::string& report_id) const;
  fs::path frames_dir(const std::string& app_id, const std::string& report_id) const;

  /// Serializes a new report. Rejects a report_id already in the manifest.
  fs::path write_report(const VideoReport& report);
  /// Overwrites an existing report (same id); used by the import operations.
  fs::path replace_report(const VideoReport& report);

  VideoReport read_report(const std::string& report_id) const;
  std::vector<VideoReport> read_all(const std::string& app_id = {}) const;
  bool contains(const std::string& report_id) const;

  /// Absolute path of a frame image (image paths are stored relative to the
  /// report directory).
  fs::path resolve_image(const VideoReport& report, const FrameRecord& frame) const;

  /// Sets the manifest extractor id; refuses to switch to a different one once
  /// set, so codebooks from two extractors cannot be mixed in one corpus.
  void set_extractor(const std::string& extractor_id, const std::string& except_report = {});

  /// Overrides the manifest creation timestamp (used for reproducible corpora).
  void set_created_at(const std::string& timestamp);

 private:
  void save_manifest(const CorpusManifest& manifest) const;
  fs::path write_report_file(const VideoReport& report) const;

  fs::path root_;
};

}  // namespace vdup
