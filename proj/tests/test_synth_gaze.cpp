#include <gtest/gtest.h>

#include "gazesum/attention_classifier.hpp"
#include "gazesum/pipeline.hpp"
#include "gazesum/synth_gaze.hpp"

using namespace gazesum;

namespace {

// Reading time of the text with its inter-word spaces at the profile speed.
double text_time_ms(const AttentionProfile& p, const TextLayout& layout) {
  double chars = static_cast<double>(layout.words.size() - 1);
  for (const auto& w : layout.words) chars += static_cast<double>(w.char_len);
  return p.ms_per_char * chars;
}

}  // namespace

TEST(Synth, TraceSpanMatchesIntendedReadingTime) {
  auto layout = fixture_layout(6, 5, 8);
  ASSERT_EQ(layout.words.size(), 240u);
  ASSERT_TRUE(validate_layout(layout).empty());
  auto p = profile_for_paragraphs(layout, {}, 1.0);
  auto s = generate(p, layout);
  double span = s.back().t - s.front().t;
  double expected = text_time_ms(p, layout);
  EXPECT_NEAR(span, expected, 0.05 * expected);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GT(s[i].t, s[i - 1].t);
  // heavier sentences stretch the trace by their extra dwell
  auto heavy = profile_for_paragraphs(layout, {1, 4}, 2.0);
  auto h = generate(heavy, layout);
  double extra = 0.0;
  for (const auto& w : layout.words)
    extra += p.ms_per_char * static_cast<double>(w.char_len) * (heavy.sentence_weights[w.sentence_idx] - 1.0);
  EXPECT_NEAR(h.back().t - h.front().t - span, extra, 0.05 * extra);
}

TEST(Synth, ZeroWeightSentenceReceivesNoSamples) {
  auto layout = fixture_layout(1, 5, 6);
  auto p = profile_for_paragraphs(layout, {}, 1.0);
  p.sentence_weights[2] = 0.0;
  auto s = generate(p, layout);
  for (const auto& g : s) {
    for (std::size_t w = layout.sentences[2].start_word; w < layout.sentences[2].end_word; ++w)
      EXPECT_FALSE(layout.words[w].contains(g.x, g.y)) << "sample at t=" << g.t;
  }
  auto trace = process_gaze(s);
  auto a = assign_fixations(trace, layout);
  for (std::size_t w = layout.sentences[2].start_word; w < layout.sentences[2].end_word; ++w)
    EXPECT_EQ(a.word_dwell_ms[w], 0.0);
}

TEST(Synth, SameSeedSameBytes) {
  auto layout = fixture_layout(2, 3, 5);
  auto p = profile_for_paragraphs(layout, {1}, 3.0, 1.0, 42);
  EXPECT_EQ(gaze_to_jsonl(generate(p, layout)), gaze_to_jsonl(generate(p, layout)));
  auto q = p;
  q.seed = 43;
  EXPECT_NE(gaze_to_jsonl(generate(p, layout)), gaze_to_jsonl(generate(q, layout)));
  FixtureOptions a, b;
  a.seed = b.seed = 3;
  EXPECT_EQ(fixture_layout(2, 3, 5, a), fixture_layout(2, 3, 5, b));
}

TEST(Synth, FixtureShapes) {
  auto one = fixture_layout(1, 1, 1);
  ASSERT_EQ(one.words.size(), 1u);
  EXPECT_DOUBLE_EQ(one.words[0].x0, 20.0);
  EXPECT_DOUBLE_EQ(one.words[0].y0, 20.0);
  auto text = fixture_text(uniform_counts(2, 2, 3));
  ASSERT_EQ(text.size(), 2u);
  for (const auto& para : text)
    for (const auto& sentence : para) {
      EXPECT_TRUE(std::isupper(static_cast<unsigned char>(sentence.front())));
      EXPECT_EQ(sentence.back(), '.');
    }
  FixtureOptions narrow;
  narrow.grid.page_w = 60;
  EXPECT_THROW(fixture_layout(1, 1, 1, narrow), std::invalid_argument);
}

TEST(Synth, RejectsBadProfiles) {
  auto layout = fixture_layout(1, 2, 3);
  auto p = profile_for_paragraphs(layout, {}, 1.0);
  p.sentence_weights.assign(2, 0.0);
  EXPECT_THROW(generate(p, layout), std::invalid_argument);
  p.sentence_weights = {1.0};
  EXPECT_THROW(generate(p, layout), std::invalid_argument);
  p.sentence_weights = {1.0, -1.0};
  EXPECT_THROW(generate(p, layout), std::invalid_argument);
  p.sentence_weights = {1.0, 1.0};
  EXPECT_THROW(generate(p, TextLayout{}), std::invalid_argument);
}

TEST(Synth, DwellRecoveryPerWord) {
  auto layout = fixture_layout(6, 5, 8);
  auto p = profile_for_paragraphs(layout, {3}, 2.5);
  auto trace = process_gaze(generate(p, layout));
  EXPECT_EQ(trace.fixations.size(), layout.words.size());
  auto a = assign_fixations(trace, layout);
  for (std::size_t w = 0; w < layout.words.size(); ++w) {
    double intended = p.ms_per_char * static_cast<double>(layout.words[w].char_len) *
                      p.sentence_weights[layout.words[w].sentence_idx];
    EXPECT_NEAR(a.word_dwell_ms[w], intended, std::max(0.10 * intended, 1000.0 / 60.0)) << "word " << w;
  }
}

TEST(Synth, PupilTracksWeight) {
  auto layout = fixture_layout(2, 3, 6);
  auto p = profile_for_paragraphs(layout, {1}, 3.0);
  auto trace = detect_fixations(clean_trace(generate(p, layout)));
  auto a = assign_fixations(trace, layout);
  double focused = 0, other = 0;
  std::size_t nf = 0, no = 0;
  for (std::size_t f = 0; f < trace.fixations.size(); ++f) {
    if (!a.fixation_word[f]) continue;
    bool in = layout.words[*a.fixation_word[f]].paragraph_idx == 1;
    (in ? focused : other) += *trace.fixations[f].mean_pupil;
    ++(in ? nf : no);
  }
  EXPECT_NEAR(focused / static_cast<double>(nf), 3.5, 0.05);
  EXPECT_NEAR(other / static_cast<double>(no), 3.0, 0.05);
}

TEST(Synth, PositiveWindowsOverlapFocusedParagraph) {
  auto layout = fixture_layout(6, 5, 8);
  auto p = profile_for_paragraphs(layout, {2}, 3.0);
  auto trace = process_gaze(generate(p, layout));
  auto a = assign_fixations(trace, layout);
  std::vector<bool> mask(layout.sentences.size(), false);
  for (std::size_t s = layout.paragraphs[2].start_sentence; s < layout.paragraphs[2].end_sentence; ++s) mask[s] = true;
  auto windows = label_windows(extract_features(trace), trace, a, words_of_sentences(layout, mask));
  double p0 = 1e18, p1 = -1e18;
  for (std::size_t f = 0; f < trace.fixations.size(); ++f)
    if (a.fixation_word[f] && layout.words[*a.fixation_word[f]].paragraph_idx == 2) {
      p0 = std::min(p0, trace.fixations[f].start_ms);
      p1 = std::max(p1, trace.fixations[f].end_ms);
    }
  std::size_t positives = 0;
  for (const auto& w : windows) {
    bool overlaps = w.start_ms < p1 && w.end_ms > p0;
    EXPECT_EQ(*w.label, overlaps);
    positives += *w.label;
  }
  EXPECT_GT(positives, 0u);
  EXPECT_LT(positives, windows.size());
}
