#pragma once

#include "vdup/corpus_store.hpp"
#include "vdup/eval.hpp"
#include "vdup/image.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vdup {

struct SynthSpec {
  int apps = 1;
  int bugs = 4;
  int videos_per_bug = 3;
  int frames_per_video = 8;
  double shared_frame_ratio = 0.8;  // fraction of frames a duplicate shares with its bug's script
  double vocab_overlap = 0.0;       // fraction of each bug's vocabulary drawn from an app-wide pool
  int reference_images = 200;
  int width = 96;
  int height = 160;
  int fps = 1;
  int pixel_noise = 3;  // per-recording jitter, +-levels per channel
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic colored-block screen.
RgbImage synth_screen(std::uint64_t seed, int width, int height);

struct SynthOutput {
  Dataset dataset;
  std::vector<std::filesystem::path> reference_images;
};

/// Writes a synthetic corpus of screen recordings under `root`:
/// reports (frame PNGs + OCR text), `dataset.json` with the bug grouping, and
/// `_reference/%06d.png` images for IDF. Every duplicate of a bug follows
/// the bug's screen script, replacing only early frames with unrelated
/// screens; the final frames (where the bug shows) are always kept. Output
/// bytes depend only on the spec.
SynthOutput synth_corpus(const SynthSpec& spec, const std::filesystem::path& root);

}  // namespace vdup
