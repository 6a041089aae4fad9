#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gazesum/common.hpp"

namespace gazesum {

struct WordBox {
  std::string text;
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  std::size_t sentence_idx = 0;
  std::size_t paragraph_idx = 0;
  std::size_t char_len = 0;

  double cx() const { return 0.5 * (x0 + x1); }
  double cy() const { return 0.5 * (y0 + y1); }
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  // Euclidean distance from a point to the box (0 inside).
  double distance(double x, double y) const {
    double dx = std::max({x0 - x, 0.0, x - x1});
    double dy = std::max({y0 - y, 0.0, y - y1});
    return std::hypot(dx, dy);
  }
  bool operator==(const WordBox&) const = default;
};

// Word range [start_word, end_word).
struct SentenceSpan {
  std::size_t start_word = 0;
  std::size_t end_word = 0;
  std::string text;
  bool operator==(const SentenceSpan&) const = default;
};

// Sentence range [start_sentence, end_sentence).
struct ParagraphSpan {
  std::size_t start_sentence = 0;
  std::size_t end_sentence = 0;
  bool operator==(const ParagraphSpan&) const = default;
};

struct TextLayout {
  double page_w = 0.0;
  double page_h = 0.0;
  std::vector<WordBox> words;
  std::vector<SentenceSpan> sentences;
  std::vector<ParagraphSpan> paragraphs;

  bool operator==(const TextLayout&) const = default;

  // Layouts describe a single rendered page.
  std::size_t page_count() const { return 1; }

  std::size_t sentence_word_count(std::size_t s) const {
    return sentences[s].end_word - sentences[s].start_word;
  }

  // Character length of a sentence, counting one space between words.
  std::size_t sentence_char_len(std::size_t s) const {
    const auto& span = sentences[s];
    if (span.end_word <= span.start_word) return 0;
    std::size_t n = span.end_word - span.start_word - 1;
    for (std::size_t w = span.start_word; w < span.end_word; ++w) n += words[w].char_len;
    return n;
  }

  std::size_t paragraph_of_sentence(std::size_t s) const {
    for (std::size_t p = 0; p < paragraphs.size(); ++p)
      if (s >= paragraphs[p].start_sentence && s < paragraphs[p].end_sentence) return p;
    throw std::out_of_range("sentence " + std::to_string(s) + " belongs to no paragraph");
  }
};

struct Document {
  std::string doc_id;
  std::string full_text;
  TextLayout layout;
  std::optional<std::vector<std::size_t>> target_paragraphs;

  std::string paragraph_text(std::size_t p) const {
    const auto& span = layout.paragraphs.at(p);
    std::string out;
    for (std::size_t s = span.start_sentence; s < span.end_sentence; ++s) {
      if (!out.empty()) out += ' ';
      out += layout.sentences[s].text;
    }
    return out;
  }
};

inline std::string normalize_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

// ---- sentence segmentation ----------------------------------------------

namespace detail {

inline const std::set<std::string>& abbreviations() {
  static const std::set<std::string> list{
      "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "e.g", "i.e", "inc", "ltd",
      "co", "corp", "fig", "figs", "no", "vol", "approx", "dept", "est", "gen", "gov", "lt", "col",
      "sgt", "rev", "hon", "mt", "ca", "cf", "al", "jan", "feb", "mar", "apr", "jun", "jul", "aug",
      "sep", "sept", "oct", "nov", "dec", "u.s", "u.k", "ph.d", "a.m", "p.m"};
  return list;
}

inline bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
inline bool is_opener(char c) { return c == '"' || c == '\'' || c == '(' || c == '['; }

// Token immediately before position `dot` (exclusive), lowercased, without
// leading punctuation.
inline std::string token_before(std::string_view text, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && !std::isspace(static_cast<unsigned char>(text[b - 1]))) --b;
  std::string tok;
  for (std::size_t k = b; k < dot; ++k) tok += static_cast<char>(std::tolower(static_cast<unsigned char>(text[k])));
  while (!tok.empty() && is_opener(tok.front())) tok.erase(tok.begin());
  return tok;
}

inline std::vector<std::string> split_paragraph_sentences(std::string_view para) {
  std::vector<std::string> out;
  std::string text = normalize_whitespace(para);
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t end = i + 1;
    while (end < text.size() && (is_closer(text[end]) || text[end] == '.' || text[end] == '!' || text[end] == '?'))
      ++end;
    if (end >= text.size() || text[end] != ' ') continue;
    std::size_t next = end + 1;
    if (next >= text.size()) continue;
    char n = text[next];
    if (!std::isupper(static_cast<unsigned char>(n)) && !is_opener(n)) continue;
    if (c == '.') {
      std::string tok = token_before(text, i);
      if (abbreviations().count(tok)) continue;
      // Single capital initial such as "J. Smith".
      if (tok.size() == 1 && i > 0 && std::isupper(static_cast<unsigned char>(text[i - 1]))) continue;
    }
    out.push_back(text.substr(start, end - start));
    start = next;
    i = end;
  }
  if (start < text.size()) out.push_back(text.substr(start));
  return out;
}

}  // namespace detail

// Splits raw text into paragraphs (blank-line separated), each a list of sentences.
inline std::vector<std::vector<std::string>> segment_paragraphs(std::string_view raw_text) {
  std::vector<std::vector<std::string>> out;
  std::string current;
  auto flush = [&] {
    auto sentences = detail::split_paragraph_sentences(current);
    if (!sentences.empty()) out.push_back(std::move(sentences));
    current.clear();
  };
  std::size_t pos = 0;
  while (pos <= raw_text.size()) {
    std::size_t nl = raw_text.find('\n', pos);
    std::string_view line = raw_text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    bool blank = line.find_first_not_of(" \t\r") == std::string_view::npos;
    if (blank) {
      flush();
    } else {
      current += line;
      current += ' ';
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  flush();
  return out;
}

// Rule-based splitter: sentence-final punctuation followed by whitespace and an
// uppercase letter or opening quote ends a sentence unless the preceding token
// is a known abbreviation or initial. Blank lines always split.
inline std::vector<std::string> segment_sentences(std::string_view raw_text) {
  std::vector<std::string> out;
  for (auto& para : segment_paragraphs(raw_text))
    for (auto& s : para) out.push_back(std::move(s));
  return out;
}

// ---- validation -----------------------------------------------------------

struct LayoutViolation {
  std::string rule;
  std::string message;
  std::optional<std::size_t> word;
  std::optional<std::size_t> sentence;
  std::optional<std::size_t> paragraph;
};

inline std::vector<LayoutViolation> validate_layout(const TextLayout& layout) {
  std::vector<LayoutViolation> v;
  auto add = [&](std::string rule, std::string msg, std::optional<std::size_t> w = {},
                 std::optional<std::size_t> s = {}, std::optional<std::size_t> p = {}) {
    v.push_back({std::move(rule), std::move(msg), w, s, p});
  };
  if (!(layout.page_w > 0.0) || !(layout.page_h > 0.0))
    add("page_size", "page dimensions must be positive");

  const std::size_t nw = layout.words.size();
  const std::size_t ns = layout.sentences.size();
  const std::size_t np = layout.paragraphs.size();
  for (std::size_t i = 0; i < nw; ++i) {
    const auto& w = layout.words[i];
    if (!(w.x0 < w.x1)) add("box_x", "word " + std::to_string(i) + ": x0 must be < x1", i);
    if (!(w.y0 < w.y1)) add("box_y", "word " + std::to_string(i) + ": y0 must be < y1", i);
    if (w.char_len == 0) add("char_len", "word " + std::to_string(i) + ": char_len must be positive", i);
    if (w.sentence_idx >= ns)
      add("sentence_idx", "word " + std::to_string(i) + ": sentence_idx out of range", i);
    if (w.paragraph_idx >= np)
      add("paragraph_idx", "word " + std::to_string(i) + ": paragraph_idx out of range", i);
  }

  // Sentence spans must partition the words contiguously.
  std::size_t expect = 0;
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& span = layout.sentences[s];
    if (span.start_word != expect) {
      add(span.start_word > expect ? "sentence_gap" : "sentence_overlap",
          "sentence " + std::to_string(s) + " starts at word " + std::to_string(span.start_word) +
              ", expected " + std::to_string(expect),
          {}, s);
    }
    if (span.end_word <= span.start_word)
      add("sentence_empty", "sentence " + std::to_string(s) + " has no words", {}, s);
    if (span.end_word > nw)
      add("sentence_bounds", "sentence " + std::to_string(s) + " ends past the last word", {}, s);
    expect = std::max(expect, span.end_word);
  }
  if (expect != nw)
    add("sentence_cover", "sentences cover " + std::to_string(expect) + " of " + std::to_string(nw) + " words");

  expect = 0;
  for (std::size_t p = 0; p < np; ++p) {
    const auto& span = layout.paragraphs[p];
    if (span.start_sentence != expect) {
      add(span.start_sentence > expect ? "paragraph_gap" : "paragraph_overlap",
          "paragraph " + std::to_string(p) + " starts at sentence " + std::to_string(span.start_sentence) +
              ", expected " + std::to_string(expect),
          {}, {}, p);
    }
    if (span.end_sentence <= span.start_sentence)
      add("paragraph_empty", "paragraph " + std::to_string(p) + " has no sentences", {}, {}, p);
    if (span.end_sentence > ns)
      add("paragraph_bounds", "paragraph " + std::to_string(p) + " ends past the last sentence", {}, {}, p);
    expect = std::max(expect, span.end_sentence);
  }
  if (expect != ns)
    add("paragraph_cover",
        "paragraphs cover " + std::to_string(expect) + " of " + std::to_string(ns) + " sentences");

  // Word indices must agree with the spans.
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& span = layout.sentences[s];
    std::optional<std::size_t> para;
    for (std::size_t p = 0; p < np; ++p)
      if (s >= layout.paragraphs[p].start_sentence && s < layout.paragraphs[p].end_sentence) para = p;
    for (std::size_t w = span.start_word; w < std::min(span.end_word, nw); ++w) {
      if (layout.words[w].sentence_idx != s)
        add("word_sentence", "word " + std::to_string(w) + " lies in sentence " + std::to_string(s) +
                                 " but has sentence_idx " + std::to_string(layout.words[w].sentence_idx),
            w, s);
      if (para && layout.words[w].paragraph_idx != *para)
        add("word_paragraph", "word " + std::to_string(w) + " lies in paragraph " + std::to_string(*para) +
                                  " but has paragraph_idx " + std::to_string(layout.words[w].paragraph_idx),
            w, s, para);
    }
    // Reading order: on the same line x increases.
    for (std::size_t w = span.start_word + 1; w < std::min(span.end_word, nw); ++w) {
      const auto& a = layout.words[w - 1];
      const auto& b = layout.words[w];
      double line_h = std::max(a.y1 - a.y0, 1.0);
      bool same_line = std::abs(b.y0 - a.y0) < 0.5 * line_h;
      if (same_line && b.x0 <= a.x0)
        add("reading_order", "word " + std::to_string(w) + " is left of its predecessor on the same line", w, s);
      if (!same_line && b.y0 < a.y0)
        add("reading_order", "word " + std::to_string(w) + " is above its predecessor", w, s);
    }
  }
  return v;
}

// ---- grid layout ----------------------------------------------------------

struct GridOptions {
  double page_w = 1000.0;
  double margin = 20.0;
  double char_w = 10.0;
  double char_h = 18.0;
  // Baseline-to-baseline distance as a multiple of char_h.
  double line_spacing = 1.5;
};

// Lays out paragraphs of sentences on a fixed-width character grid: one
// character cell per character, one cell between words, wrapping at the right
// margin, and a blank line between paragraphs.
inline TextLayout grid_layout(const std::vector<std::vector<std::string>>& paragraphs,
                              const GridOptions& opt = {}) {
  TextLayout layout;
  layout.page_w = opt.page_w;
  const double usable = opt.page_w - 2.0 * opt.margin;
  const double line_h = opt.char_h * opt.line_spacing;
  double x = opt.margin, y = opt.margin;
  bool line_empty = true;
  for (std::size_t p = 0; p < paragraphs.size(); ++p) {
    ParagraphSpan pspan{layout.sentences.size(), layout.sentences.size()};
    for (const auto& sentence : paragraphs[p]) {
      SentenceSpan sspan{layout.words.size(), layout.words.size(), normalize_whitespace(sentence)};
      std::size_t s_idx = layout.sentences.size();
      std::size_t pos = 0;
      const std::string& text = sspan.text;
      while (pos < text.size()) {
        std::size_t end = text.find(' ', pos);
        if (end == std::string::npos) end = text.size();
        std::string word = text.substr(pos, end - pos);
        pos = end + 1;
        double width = static_cast<double>(word.size()) * opt.char_w;
        if (width > usable)
          throw std::invalid_argument("page too narrow for word '" + word + "' (" + std::to_string(width) + " px)");
        if (!line_empty && x + width > opt.page_w - opt.margin) {
          x = opt.margin;
          y += line_h;
          line_empty = true;
        }
        WordBox box;
        box.text = word;
        box.x0 = x;
        box.x1 = x + width;
        box.y0 = y;
        box.y1 = y + opt.char_h;
        box.sentence_idx = s_idx;
        box.paragraph_idx = p;
        box.char_len = word.size();
        layout.words.push_back(std::move(box));
        x += width + opt.char_w;
        line_empty = false;
      }
      sspan.end_word = layout.words.size();
      layout.sentences.push_back(std::move(sspan));
    }
    pspan.end_sentence = layout.sentences.size();
    layout.paragraphs.push_back(pspan);
    x = opt.margin;
    y += 2.0 * line_h;
    line_empty = true;
  }
  layout.page_h = y - 2.0 * line_h + opt.char_h + opt.margin;
  if (layout.words.empty()) layout.page_h = 2.0 * opt.margin + opt.char_h;
  return layout;
}

// Builds a document whose text is paragraphs joined by blank lines.
inline Document make_document(std::string doc_id, const TextLayout& layout,
                              std::optional<std::vector<std::size_t>> targets = {}) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  doc.layout = layout;
  doc.target_paragraphs = std::move(targets);
  for (std::size_t p = 0; p < layout.paragraphs.size(); ++p) {
    if (p) doc.full_text += "\n\n";
    doc.full_text += doc.paragraph_text(p);
  }
  return doc;
}

inline std::vector<std::string> validate_document(const Document& doc) {
  std::vector<std::string> problems;
  for (const auto& v : validate_layout(doc.layout)) problems.push_back(v.message);
  std::string joined;
  for (const auto& s : doc.layout.sentences) {
    if (!joined.empty()) joined += ' ';
    joined += s.text;
  }
  if (normalize_whitespace(doc.full_text) != normalize_whitespace(joined))
    problems.push_back("full_text does not match the concatenated sentence texts");
  if (doc.target_paragraphs) {
    for (auto p : *doc.target_paragraphs)
      if (p >= doc.layout.paragraphs.size())
        problems.push_back("target paragraph " + std::to_string(p) + " out of range");
  }
  return problems;
}

// ---- serialization --------------------------------------------------------

inline void to_json(json& j, const WordBox& w) {
  j = json{{"text", w.text},       {"x0", w.x0}, {"y0", w.y0}, {"x1", w.x1}, {"y1", w.y1},
           {"sentence_idx", w.sentence_idx}, {"paragraph_idx", w.paragraph_idx}, {"char_len", w.char_len}};
}
inline void from_json(const json& j, WordBox& w) {
  w.text = j.at("text").get<std::string>();
  w.x0 = j.at("x0").get<double>();
  w.y0 = j.at("y0").get<double>();
  w.x1 = j.at("x1").get<double>();
  w.y1 = j.at("y1").get<double>();
  w.sentence_idx = j.at("sentence_idx").get<std::size_t>();
  w.paragraph_idx = j.at("paragraph_idx").get<std::size_t>();
  w.char_len = j.contains("char_len") ? j.at("char_len").get<std::size_t>() : w.text.size();
}
inline void to_json(json& j, const SentenceSpan& s) {
  j = json{{"start_word", s.start_word}, {"end_word", s.end_word}, {"text", s.text}};
}
inline void from_json(const json& j, SentenceSpan& s) {
  s.start_word = j.at("start_word").get<std::size_t>();
  s.end_word = j.at("end_word").get<std::size_t>();
  s.text = j.value("text", std::string());
}
inline void to_json(json& j, const ParagraphSpan& p) {
  j = json{{"start_sentence", p.start_sentence}, {"end_sentence", p.end_sentence}};
}
inline void from_json(const json& j, ParagraphSpan& p) {
  p.start_sentence = j.at("start_sentence").get<std::size_t>();
  p.end_sentence = j.at("end_sentence").get<std::size_t>();
}
inline void to_json(json& j, const TextLayout& l) {
  j = json{{"page_w", l.page_w}, {"page_h", l.page_h}, {"words", l.words},
           {"sentences", l.sentences}, {"paragraphs", l.paragraphs}};
}
inline void from_json(const json& j, TextLayout& l) {
  try {
    l.page_w = j.at("page_w").get<double>();
    l.page_h = j.at("page_h").get<double>();
    l.words = j.at("words").get<std::vector<WordBox>>();
    l.sentences = j.at("sentences").get<std::vector<SentenceSpan>>();
    l.paragraphs = j.at("paragraphs").get<std::vector<ParagraphSpan>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("layout: ") + e.what());
  }
}

inline json to_json(const LayoutViolation& v) {
  json j{{"rule", v.rule}, {"message", v.message}};
  if (v.word) j["word"] = *v.word;
  if (v.sentence) j["sentence"] = *v.sentence;
  if (v.paragraph) j["paragraph"] = *v.paragraph;
  return j;
}

// Document files carry the text and targets; the layout travels separately.
inline json document_meta_json(const Document& d) {
  json j{{"doc_id", d.doc_id}, {"full_text", d.full_text}, {"target_paragraphs", nullptr}};
  if (d.target_paragraphs) j["target_paragraphs"] = *d.target_paragraphs;
  return j;
}

inline Document document_from_json(const json& meta, TextLayout layout) {
  Document d;
  d.doc_id = meta.value("doc_id", std::string("doc"));
  d.layout = std::move(layout);
  if (meta.contains("full_text") && meta["full_text"].is_string()) {
    d.full_text = meta["full_text"].get<std::string>();
  } else {
    d = make_document(d.doc_id, d.layout);
  }
  if (meta.contains("target_paragraphs") && meta["target_paragraphs"].is_array())
    d.target_paragraphs = meta["target_paragraphs"].get<std::vector<std::size_t>>();
  return d;
}

inline TextLayout read_layout(const std::filesystem::path& path) { return read_json(path).get<TextLayout>(); }

}  // namespace gazesum
