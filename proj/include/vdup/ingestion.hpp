#pragma once

#include "vdup/corpus_store.hpp"
#include "vdup/features.hpp"
#include "vdup/types.hpp"

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace vdup {

inline constexpr const char* kDefaultDecoderCommand = "{decoder} -i {input} -vf fps={fps} {outdir}/%06d.png";

struct IngestionConfig {
  int fps = 5;
  std::string decoder = "ffmpeg";
  std::string decoder_command = kDefaultDecoderCommand;
  std::optional<int> max_frames;

  void validate() const;
};

/// Replaces `{name}` placeholders; values are substituted verbatim.
std::string expand_template(std::string text, const std::vector<std::pair<std::string, std::string>>& values);

/// Quotes a string for /bin/sh.
std::string shell_quote(const std::string& text);

struct CommandResult {
  int exit_code = 0;
  std::string out;
  std::string err;
};

/// Runs a shell command, capturing stdout and stderr.
CommandResult run_command(const std::string& command);

/// Decodes `video` into PNG frames under `outdir` with the external decoder
/// and returns a report whose frames reference those images (absolute paths),
/// numbered 0..n-1 in temporal order.
VideoReport sample_frames(const std::filesystem::path& video, const std::filesystem::path& outdir,
                          const IngestionConfig& cfg, const std::string& report_id, const std::string& app_id);

struct ImportResult {
  VideoReport report;
  std::vector<std::string> warnings;
};

/// Applies a feature JSONL stream (header line then one line per frame).
/// Previously attached vectors are dropped, so re-importing is idempotent.
ImportResult apply_features(VideoReport report, std::istream& in);

/// Applies an OCR JSONL stream of {"frame","text"} lines. Frames absent from
/// the stream keep empty text; repeated frames keep the last entry.
ImportResult apply_ocr_text(VideoReport report, std::istream& in);

/// Runs `{image}`-templated OCR per frame image and attaches stdout as text.
VideoReport run_ocr(VideoReport report, const CorpusStore& store, const std::string& command_template);

/// Corpus-level wrappers: read, apply, persist.
ImportResult import_features(CorpusStore& store, const std::string& report_id,
                             const std::filesystem::path& feature_file);
ImportResult import_ocr_text(CorpusStore& store, const std::string& report_id,
                             const std::filesystem::path& text_file);

/// Copies sampled frame images into the corpus layout and writes the report.
VideoReport store_sampled_report(CorpusStore& store, VideoReport sampled);

/// Runs the built-in extractor over every frame image of a stored report.
VideoReport extract_report_features(CorpusStore& store, const std::string& report_id, const ExtractorSpec& spec);

}  // namespace vdup
