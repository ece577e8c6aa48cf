#include "vdup/synth.hpp"

#include "vdup/error.hpp"
#include "vdup/kmeans.hpp"
#include "vdup/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <random>
#include <set>

namespace vdup {

void SynthSpec::validate() const {
  if (apps < 1 || bugs < 1 || videos_per_bug < 1 || frames_per_video < 1) {
    fail(ErrorKind::Validation, "synthetic corpus sizes must be positive");
  }
  if (!(shared_frame_ratio >= 0.0 && shared_frame_ratio <= 1.0)) {
    fail(ErrorKind::Validation, "shared_frame_ratio must lie in [0,1]");
  }
  if (!(vocab_overlap >= 0.0 && vocab_overlap <= 1.0)) fail(ErrorKind::Validation, "vocab_overlap must lie in [0,1]");
  if (reference_images < 0) fail(ErrorKind::Validation, "reference_images must be >= 0");
  if (width < 16 || height < 16) fail(ErrorKind::Validation, "synthetic frames must be at least 16x16");
  if (fps < 1) fail(ErrorKind::Validation, "fps must be >= 1");
  if (pixel_noise < 0 || pixel_noise > 64) fail(ErrorKind::Validation, "pixel_noise must lie in [0,64]");
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix(seed);
  for (auto p : parts) h = splitmix(h ^ p);
  return h;
}

int draw_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(detail::unit_draw(rng) * (hi - lo + 1));
}

enum Stream : std::uint64_t { kWords = 1, kVocab, kScreen, kText, kVideo, kReplace, kUnique, kJitter, kReference };

class WordSource {
 public:
  explicit WordSource(std::uint64_t seed) : rng_(seed) {}

  std::string next() {
    static constexpr char kCons[] = "bdfgklmnprtvz";
    static constexpr char kVow[] = "aeiou";
    static constexpr char kTail[] = "nrlkt";
    for (;;) {
      std::string w;
      const int syllables = draw_int(rng_, 2, 3);
      for (int s = 0; s < syllables; ++s) {
        w.push_back(kCons[draw_int(rng_, 0, 12)]);
        w.push_back(kVow[draw_int(rng_, 0, 4)]);
      }
      if (detail::unit_draw(rng_) < 0.5) w.push_back(kTail[draw_int(rng_, 0, 4)]);
      if (lemmatize(w) != w || !used_.insert(w).second) continue;
      return w;
    }
  }

 private:
  std::mt19937_64 rng_;
  std::set<std::string> used_;
};

std::string screen_text(std::uint64_t seed, const std::vector<std::string>& vocab) {
  std::mt19937_64 rng(seed);
  std::string text;
  for (int i = 0; i < 5; ++i) {
    if (!text.empty()) text += ' ';
    std::string w = vocab[static_cast<std::size_t>(draw_int(rng, 0, static_cast<int>(vocab.size()) - 1))];
    if (i == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    text += w;
  }
  // OCR-style noise that preprocessing strips.
  if (detail::unit_draw(rng) < 0.5) text += " " + std::to_string(draw_int(rng, 1, 999)) + "!";
  return text;
}

RgbImage jittered(RgbImage image, int amount, std::uint64_t seed) {
  if (amount == 0) return image;
  std::mt19937_64 rng(seed);
  for (auto& p : image.pixels) {
    const int v = static_cast<int>(p) + draw_int(rng, -amount, amount);
    p = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
  }
  return image;
}

std::string frame_name(int index) {
  char name[32];
  std::snprintf(name, sizeof name, "%06d.png", index);
  return name;
}

}  // namespace

RgbImage synth_screen(std::uint64_t seed, int width, int height) {
  std::mt19937_64 rng(seed);
  auto color = [&] {
    return std::array<std::uint8_t, 3>{static_cast<std::uint8_t>(draw_int(rng, 0, 255)),
                                       static_cast<std::uint8_t>(draw_int(rng, 0, 255)),
                                       static_cast<std::uint8_t>(draw_int(rng, 0, 255))};
  };
  RgbImage img(width, height);
  auto fill = [&](int x0, int y0, int x1, int y1, const std::array<std::uint8_t, 3>& c) {
    for (int y = std::max(0, y0); y < std::min(height, y1); ++y) {
      for (int x = std::max(0, x0); x < std::min(width, x1); ++x) {
        std::copy(c.begin(), c.end(), img.at(x, y));
      }
    }
  };
  fill(0, 0, width, height, color());
  fill(0, 0, width, height / 8, color());  // app bar
  const int blocks = draw_int(rng, 3, 6);
  for (int b = 0; b < blocks; ++b) {
    const int bw = draw_int(rng, width / 6, width * 3 / 4);
    const int bh = draw_int(rng, height / 8, height / 2);
    const int x0 = draw_int(rng, 0, width - bw);
    const int y0 = draw_int(rng, height / 8, height - bh);
    fill(x0, y0, x0 + bw, y0 + bh, color());
  }
  return img;
}

SynthOutput synth_corpus(const SynthSpec& spec, const std::filesystem::path& root) {
  spec.validate();
  if (std::filesystem::exists(root / "manifest.json")) {
    fail(ErrorKind::Validation, root.string() + " already holds a corpus");
  }
  CorpusStore store(root);
  SynthOutput out;
  const int frames = spec.frames_per_video;
  const int shared = static_cast<int>(std::lround(spec.shared_frame_ratio * frames));
  constexpr int kVocabSize = 12;
  const int common_words = static_cast<int>(std::lround(spec.vocab_overlap * kVocabSize));

  for (int a = 0; a < spec.apps; ++a) {
    char app_name[16];
    std::snprintf(app_name, sizeof app_name, "A%d", a);
    Dataset::App app{app_name, {}};
    WordSource words(derive(spec.seed, {kWords, static_cast<std::uint64_t>(a)}));
    std::vector<std::string> pool;
    for (int i = 0; i < kVocabSize; ++i) pool.push_back(words.next());

    for (int b = 0; b < spec.bugs; ++b) {
      char bug_name[16];
      std::snprintf(bug_name, sizeof bug_name, "B%02d", b);
      Dataset::Bug bug{bug_name, {}};
      std::vector<std::string> vocab(pool.begin(), pool.begin() + common_words);
      while (static_cast<int>(vocab.size()) < kVocabSize) vocab.push_back(words.next());

      std::vector<std::uint64_t> script;
      for (int p = 0; p < frames; ++p) script.push_back(derive(spec.seed, {kScreen, static_cast<std::uint64_t>(a),
                                                                         static_cast<std::uint64_t>(b),
                                                                         static_cast<std::uint64_t>(p)}));

      for (int v = 0; v < spec.videos_per_bug; ++v) {
        const auto av = static_cast<std::uint64_t>(a);
        const auto bv = static_cast<std::uint64_t>(b);
        const auto vv = static_cast<std::uint64_t>(v);
        // Positions replaced by unrelated screens: drawn from everything but
        // the final frame, which always shows the bug.
        std::vector<int> candidates;
        for (int p = 0; p < (shared >= 1 ? frames - 1 : frames); ++p) candidates.push_back(p);
        std::mt19937_64 rng(derive(spec.seed, {kReplace, av, bv, vv}));
        for (std::size_t i = candidates.size(); i > 1; --i) {
          const auto j = static_cast<std::size_t>(detail::unit_draw(rng) * static_cast<double>(i));
          std::swap(candidates[i - 1], candidates[j]);
        }
        const std::set<int> replaced(candidates.begin(),
                                     candidates.begin() + std::min<std::size_t>(candidates.size(), frames - shared));
        std::vector<std::string> noise;
        WordSource noise_words(derive(spec.seed, {kUnique, av, bv, vv}));

        char report_name[48];
        std::snprintf(report_name, sizeof report_name, "%s-%s-V%d", app_name, bug_name, v);
        VideoReport report;
        report.report_id = report_name;
        report.app_id = app_name;
        report.fps = spec.fps;
        const auto dir = store.frames_dir(report.app_id, report.report_id);
        for (int p = 0; p < frames; ++p) {
          const auto pv = static_cast<std::uint64_t>(p);
          std::uint64_t screen_seed;
          std::string text;
          if (replaced.count(p)) {
            screen_seed = derive(spec.seed, {kUnique, av, bv, vv, pv});
            std::vector<std::string> own;
            for (int i = 0; i < 5; ++i) own.push_back(noise_words.next());
            text = screen_text(derive(spec.seed, {kText, av, bv, vv, pv, 1}), own);
          } else {
            screen_seed = script[static_cast<std::size_t>(p)];
            text = screen_text(derive(spec.seed, {kText, av, bv, pv}), vocab);
          }
          const RgbImage image = jittered(synth_screen(screen_seed, spec.width, spec.height), spec.pixel_noise,
                                          derive(spec.seed, {kJitter, av, bv, vv, pv}));
          write_png(dir / frame_name(p), image);
          FrameRecord f;
          f.index = p;
          f.image_path = "frames/" + frame_name(p);
          f.ocr_text = std::move(text);
          report.frames.push_back(std::move(f));
        }
        store.write_report(report);
        bug.reports.push_back(report.report_id);
      }
      app.bugs.push_back(std::move(bug));
    }
    out.dataset.apps.push_back(std::move(app));
  }

  for (int i = 0; i < spec.reference_images; ++i) {
    const auto path = root / "_reference" / frame_name(i);
    write_png(path, synth_screen(derive(spec.seed, {kReference, static_cast<std::uint64_t>(i)}), spec.width,
                                 spec.height));
    out.reference_images.push_back(path);
  }
  atomic_write(root / "dataset.json", to_json(out.dataset).dump(2) + "\n");
  store.set_created_at("1970-01-01T00:00:00Z");
  return out;
}

}  // namespace vdup
