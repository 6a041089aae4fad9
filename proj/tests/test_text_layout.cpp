#include <gtest/gtest.h>

#include "gazesum/synth_gaze.hpp"
#include "gazesum/text_layout.hpp"

using namespace gazesum;

TEST(SegmentSentences, PlainSentences) {
  EXPECT_EQ(segment_sentences("A b. C d."), (std::vector<std::string>{"A b.", "C d."}));
}

TEST(SegmentSentences, AbbreviationDoesNotSplit) {
  EXPECT_EQ(segment_sentences("Dr. Smith left. He ran."), (std::vector<std::string>{"Dr. Smith left.", "He ran."}));
}

TEST(SegmentSentences, NoTerminatorIsOneSentence) {
  EXPECT_EQ(segment_sentences("no terminator"), (std::vector<std::string>{"no terminator"}));
}

TEST(SegmentSentences, BlankLineAlwaysSplitsAndQuotesClose) {
  auto s = segment_sentences("He said \"stop.\" Then left\n\nnew paragraph here");
  EXPECT_EQ(s, (std::vector<std::string>{"He said \"stop.\"", "Then left", "new paragraph here"}));
}

TEST(SegmentSentences, InitialsAndLowercaseContinuations) {
  EXPECT_EQ(segment_sentences("J. Smith wrote it. It was fine."),
            (std::vector<std::string>{"J. Smith wrote it.", "It was fine."}));
  EXPECT_EQ(segment_sentences("Version 2.5 is out. yes it is."),
            (std::vector<std::string>{"Version 2.5 is out. yes it is."}));
}

TEST(ValidateLayout, FixtureIsClean) {
  auto layout = fixture_layout(6, 5, 8);
  EXPECT_EQ(layout.words.size(), 240u);
  EXPECT_TRUE(validate_layout(layout).empty());
}

TEST(ValidateLayout, InvertedBoxNamesTheWord) {
  auto layout = fixture_layout(1, 2, 3);
  std::swap(layout.words[4].x0, layout.words[4].x1);
  auto v = validate_layout(layout);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "box_x");
  EXPECT_EQ(v[0].word, 4u);
}

TEST(ValidateLayout, SentenceGapIsReported) {
  auto layout = fixture_layout(1, 3, 3);
  layout.sentences[1].start_word = 4;  // word 3 is now in no sentence
  auto v = validate_layout(layout);
  bool gap = false;
  for (const auto& x : v)
    if (x.rule == "sentence_gap" && x.sentence == 1u) gap = true;
  EXPECT_TRUE(gap);
}

TEST(ValidateLayout, MismatchedSentenceIndex) {
  auto layout = fixture_layout(2, 2, 3);
  layout.words[0].sentence_idx = 1;
  auto v = validate_layout(layout);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].rule, "word_sentence");
}

TEST(GridLayout, SingleWordSitsAtTheMargin) {
  auto layout = fixture_layout(1, 1, 1);
  ASSERT_EQ(layout.words.size(), 1u);
  EXPECT_DOUBLE_EQ(layout.words[0].x0, 20.0);
  EXPECT_DOUBLE_EQ(layout.words[0].y0, 20.0);
  EXPECT_DOUBLE_EQ(layout.words[0].y1 - layout.words[0].y0, 18.0);
  EXPECT_DOUBLE_EQ(layout.words[0].x1 - layout.words[0].x0, 10.0 * static_cast<double>(layout.words[0].char_len));
}

TEST(GridLayout, WordWiderThanPageIsRejected) {
  GridOptions opt;
  opt.page_w = 100;
  EXPECT_THROW(grid_layout({{"Supercalifragilistic."}}, opt), std::invalid_argument);
}

TEST(GridLayout, WrapsAndLeavesBlankLineBetweenParagraphs) {
  auto layout = fixture_layout(2, 5, 8);
  double line_h = 27.0;
  bool wrapped = false;
  for (std::size_t w = 1; w < layout.words.size(); ++w) {
    const auto& a = layout.words[w - 1];
    const auto& b = layout.words[w];
    if (a.paragraph_idx == b.paragraph_idx && b.y0 > a.y0) {
      wrapped = true;
      EXPECT_DOUBLE_EQ(b.y0 - a.y0, line_h);
      EXPECT_DOUBLE_EQ(b.x0, 20.0);
    }
    if (a.paragraph_idx != b.paragraph_idx) {
      EXPECT_DOUBLE_EQ(b.y0 - a.y0, 2 * line_h);
    }
  }
  EXPECT_TRUE(wrapped);
}

TEST(LayoutJson, RoundTrip) {
  auto layout = fixture_layout(2, 3, 4);
  json j = layout;
  auto back = j.get<TextLayout>();
  EXPECT_EQ(back, layout);
  for (const char* key : {"page_w", "page_h", "words", "sentences", "paragraphs"}) EXPECT_TRUE(j.contains(key));
}

TEST(Document, FullTextMatchesSentences) {
  auto doc = fixture_document(3, 2, 4, std::vector<std::size_t>{0, 2});
  EXPECT_TRUE(validate_document(doc).empty());
  EXPECT_EQ(segment_sentences(doc.full_text).size(), doc.layout.sentences.size());
  EXPECT_EQ(segment_paragraphs(doc.full_text).size(), 3u);
  doc.full_text += " extra";
  EXPECT_FALSE(validate_document(doc).empty());
}

TEST(TextLayout, SentenceCharLengthCountsInnerSpaces) {
  TextLayout layout = grid_layout({{"Ab cde f."}});
  EXPECT_EQ(layout.sentence_char_len(0), 9u);
  EXPECT_EQ(layout.sentence_word_count(0), 3u);
}
