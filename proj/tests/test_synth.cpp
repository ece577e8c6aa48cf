#include "support.hpp"

#include "vdup/error.hpp"
#include "vdup/fusion.hpp"
#include "vdup/synth.hpp"

#include <doctest.h>

#include <map>

using namespace vdup;
using vdup::test::Scratch;

namespace {

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
  }
  return files;
}

SynthSpec small() {
  SynthSpec s;
  s.reference_images = 3;
  s.seed = 5;
  return s;
}

ModeSelection agreement(const fs::path& root, const Dataset& d) {
  CorpusStore store(root);
  std::map<std::string, TextDocument> docs;
  for (const auto& r : store.read_all()) docs[r.report_id] = make_document(r, DocStrategy::AllText);
  std::vector<DocPair> dups, nondups;
  for (const auto& [a, b] : d.duplicate_pairs(d.apps[0])) dups.push_back({&docs.at(a), &docs.at(b)});
  for (const auto& [a, b] : d.non_duplicate_pairs(d.apps[0])) nondups.push_back({&docs.at(a), &docs.at(b)});
  return select_mode(dups, nondups, 0.128);
}

}  // namespace

TEST_CASE("fixed seed gives a byte-identical corpus") {
  Scratch a, b;
  synth_corpus(small(), a.path());
  synth_corpus(small(), b.path());
  const auto ta = tree(a.path());
  CHECK(ta.size() == 1 + 1 + 12 + 12 * 8 + 3);  // manifest, dataset, reports, frames, reference
  CHECK(ta == tree(b.path()));
}

TEST_CASE("corpus shape") {
  Scratch dir;
  const auto out = synth_corpus(small(), dir.path());
  REQUIRE(out.dataset.apps.size() == 1);
  CHECK(out.dataset.apps[0].bugs.size() == 4);
  CHECK(out.reference_images.size() == 3);
  CorpusStore store(dir.path());
  const auto r = store.read_report(out.dataset.apps[0].bugs[1].reports[2]);
  CHECK(r.frames.size() == 8);
  CHECK(r.mode == FeatureMode::None);
  CHECK(!r.frames[3].ocr_text->empty());
  const auto img = read_png(store.resolve_image(r, r.frames[3]));
  CHECK(img.width == 96);
  CHECK(img.height == 160);
}

TEST_CASE("full sharing without pixel noise gives identical frame sets") {
  Scratch dir;
  auto spec = small();
  spec.shared_frame_ratio = 1.0;
  spec.pixel_noise = 0;
  const auto out = synth_corpus(spec, dir.path());
  CorpusStore store(dir.path());
  for (const auto& bug : out.dataset.apps[0].bugs) {
    const auto a = store.read_report(bug.reports[0]);
    const auto b = store.read_report(bug.reports[1]);
    for (std::size_t f = 0; f < a.frames.size(); ++f) {
      CHECK(read_file(store.resolve_image(a, a.frames[f])) == read_file(store.resolve_image(b, b.frames[f])));
      CHECK(a.frames[f].ocr_text == b.frames[f].ocr_text);
    }
  }
}

TEST_CASE("the final frame is always shared between duplicates") {
  Scratch dir;
  auto spec = small();
  spec.shared_frame_ratio = 0.2;
  spec.pixel_noise = 0;
  const auto out = synth_corpus(spec, dir.path());
  CorpusStore store(dir.path());
  const auto& bug = out.dataset.apps[0].bugs[0];
  const auto a = store.read_report(bug.reports[0]);
  const auto b = store.read_report(bug.reports[2]);
  CHECK(read_file(store.resolve_image(a, a.frames.back())) == read_file(store.resolve_image(b, b.frames.back())));
}

TEST_CASE("shared vocabulary across bugs selects visual-only, disjoint selects combined") {
  Scratch shared, disjoint;
  auto spec = small();
  spec.vocab_overlap = 1.0;
  const auto s = agreement(shared.path(), synth_corpus(spec, shared.path()).dataset);
  CHECK(std::abs(s.v_dup - s.v_nondup) <= 0.128);
  CHECK(s.mode == FusionMode::VisualOnly);
  spec.vocab_overlap = 0.0;
  const auto d = agreement(disjoint.path(), synth_corpus(spec, disjoint.path()).dataset);
  CHECK(d.mode == FusionMode::Combined);
}

TEST_CASE("synth refuses invalid specs and existing corpora") {
  Scratch dir;
  auto spec = small();
  spec.shared_frame_ratio = 1.5;
  CHECK_THROWS_AS(synth_corpus(spec, dir.path()), Error);
  synth_corpus(small(), dir.path());
  CHECK_THROWS_AS(synth_corpus(small(), dir.path()), Error);
}
