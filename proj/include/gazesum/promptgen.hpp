#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gazesum/alignment.hpp"
#include "gazesum/common.hpp"
#include "gazesum/heatmap.hpp"
#include "gazesum/text_layout.hpp"

namespace gazesum {

enum class MethodKind { Density, Heatmap, SVM, TargetParagraphs, TextOnly };

inline constexpr MethodKind kAllMethods[] = {MethodKind::Density, MethodKind::Heatmap, MethodKind::SVM,
                                             MethodKind::TargetParagraphs, MethodKind::TextOnly};

inline std::string to_string(MethodKind m) {
  switch (m) {
    case MethodKind::Density: return "density";
    case MethodKind::Heatmap: return "heatmap";
    case MethodKind::SVM: return "svm";
    case MethodKind::TargetParagraphs: return "target_paragraphs";
    case MethodKind::TextOnly: return "text_only";
  }
  return "unknown";
}

inline MethodKind parse_method(std::string_view s) {
  std::string k;
  for (char c : s) k += c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (k == "density") return MethodKind::Density;
  if (k == "heatmap") return MethodKind::Heatmap;
  if (k == "svm") return MethodKind::SVM;
  if (k == "target_paragraphs" || k == "targetparagraphs" || k == "target") return MethodKind::TargetParagraphs;
  if (k == "text_only" || k == "textonly" || k == "text") return MethodKind::TextOnly;
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

inline bool is_personalized(MethodKind m) { return m != MethodKind::TextOnly; }
inline bool needs_gaze(MethodKind m) {
  return m == MethodKind::Density || m == MethodKind::Heatmap || m == MethodKind::SVM;
}

// Raised when a method is asked to render without one of its inputs.
class MissingInputError : public std::invalid_argument {
 public:
  MissingInputError(MethodKind m, const std::string& slot)
      : std::invalid_argument(to_string(m) + " prompt is missing required input: " + slot), slot_(slot) {}
  const std::string& slot() const { return slot_; }

 private:
  std::string slot_;
};

// Template texts with {slot} placeholders. The builtin set is byte-identical
// to the files shipped in templates/.
struct PromptTemplates {
  std::string density;
  std::string heatmap;
  std::string svm;
  std::string target_paragraphs;
  std::string text_only;
  std::string personalization_requirement;
  std::string comprehensiveness_requirement;
  std::string quality_requirement;

  const std::string& for_method(MethodKind m) const {
    switch (m) {
      case MethodKind::Density: return density;
      case MethodKind::Heatmap: return heatmap;
      case MethodKind::SVM: return svm;
      case MethodKind::TargetParagraphs: return target_paragraphs;
      case MethodKind::TextOnly: return text_only;
    }
    throw std::logic_error("unhandled method");
  }

  // Template file name for each entry, relative to the template directory.
  static const std::vector<std::pair<std::string, std::string PromptTemplates::*>>& files() {
    static const std::vector<std::pair<std::string, std::string PromptTemplates::*>> f{
        {"density.txt", &PromptTemplates::density},
        {"heatmap.txt", &PromptTemplates::heatmap},
        {"svm.txt", &PromptTemplates::svm},
        {"target_paragraphs.txt", &PromptTemplates::target_paragraphs},
        {"text_only.txt", &PromptTemplates::text_only},
        {"requirement_personalization.txt", &PromptTemplates::personalization_requirement},
        {"requirement_comprehensiveness.txt", &PromptTemplates::comprehensiveness_requirement},
        {"requirement_quality.txt", &PromptTemplates::quality_requirement}};
    return f;
  }

  static PromptTemplates load(const std::filesystem::path& dir) {
    PromptTemplates t;
    for (const auto& [name, member] : files()) t.*member = read_file(dir / name);
    return t;
  }

  static const PromptTemplates& builtin() {
    static const PromptTemplates t{
        R"(Generate a one-paragraph {summary_words}-word personalized summary for this article based on user's focused sentences. {personalization_requirement} More generally, a good summary should be more comprehensive and of better quality. {comprehensiveness_requirement} {quality_requirement} Do not explain or say any of your analysis. The user spends more time on the following sentences in the article: {top_attended_sentences}
Article Text: {source_text})",
        R"(Generate a one-paragraph {summary_words}-word personalized summary for the following article based on user's gaze heatmap. Bright and warm colors like red or orange mean the user spends more time on it, and dim and cold colors like blue mean the user spends less time on it. {personalization_requirement} More generally, a good summary should be more comprehensive and of better quality. {comprehensiveness_requirement} {quality_requirement} Based on this heatmap and text, you should first identify which sentences and paragraphs the user spends more time reading and then generate a personalized summary of this article based on these contents. Do not explain or say any of your analysis.
Article Text: {source_text})",
        R"(Generate a one-paragraph {summary_words}-word personalized summary for this article based on user's focused sentences. {personalization_requirement} More generally, a good summary should be more comprehensive and of better quality. {comprehensiveness_requirement} {quality_requirement} Do not explain or say any of your analysis. Sentences below are classified as focused sentences which means the user spent more time reading these sentences: {top_attended_sentences}
Article Text: {source_text})",
        R"(Generate a one-paragraph {summary_words}-word personalized summary for this article based on user's focus. {personalization_requirement} More generally, a good summary should be more comprehensive and of better quality. {comprehensiveness_requirement} {quality_requirement} Do not explain or say any of your analysis. The {target_paragraph_1} and {target_paragraph_2} paragraphs are the ones that users pay most attention to.
Article Text: {source_text})",
        R"(Generate a one-paragraph {summary_words}-word summary for this article. Generally, a good summary should be more comprehensive and of better quality. {comprehensiveness_requirement} {quality_requirement} The original article is shown below. Do not explain or say any of your analysis.
Article Text: {source_text})",
        R"(A good personalized summary should include more contents that the user spend more time reading and touch other contents briefly. For the content that the user is focused on, a better personalized summary should contain more details and be more consistent with the original statements.)",
        R"(For comprehensiveness, while covering as much of the user's focused topic as possible, a good summary should also touch on other aspects.)",
        R"(For quality, please consider four aspects: (1) Consistency - the factual alignment between the summary and the summarized source. (2) Coherence - the collective quality of all sentences. The summary should be well-structured and well-organized. (3) Relevance - selection of important content from the source. (4) Fluency - the quality of individual sentences.)"};
    return t;
  }
};

// Replaces {name} placeholders in one pass; substituted values are not rescanned.
inline std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(tmpl.size() * 2);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        std::string name(tmpl.substr(i + 1, close - i - 1));
        auto it = slots.find(name);
        if (it == slots.end()) throw std::invalid_argument("template slot {" + name + "} has no value");
        out += it->second;
        i = close + 1;
        continue;
      }
    }
    out += tmpl[i++];
  }
  return out;
}

inline std::string ordinal(std::size_t n) {
  std::string suffix = "th";
  if (n % 100 < 11 || n % 100 > 13) {
    if (n % 10 == 1) suffix = "st";
    else if (n % 10 == 2) suffix = "nd";
    else if (n % 10 == 3) suffix = "rd";
  }
  return std::to_string(n) + suffix;
}

inline std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    bool space = std::isspace(static_cast<unsigned char>(c));
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

struct PromptBundle {
  MethodKind method = MethodKind::TextOnly;
  std::string text;
  // Page images, attached before the text in document order.
  std::vector<HeatmapImage> images;
  std::string doc_id;
  std::string session_id;
  // Sentences the representation singled out (selected sentences, the
  // heat-ranked sentences, or the target paragraphs' sentences). Not part of
  // the prompt; carried for audit and for offline mock backends.
  std::vector<std::string> focus_sentences;
};

struct PromptOptions {
  // Render paragraph ids as ordinals ("2nd") rather than numerals ("2").
  bool ordinal_paragraph_ids = true;
  // Replace the fixed 150-word target by ceil(source words / 5).
  bool one_fifth_length = false;
  const PromptTemplates* templates = nullptr;
};

struct PromptInputs {
  const AttentionResult* attention = nullptr;
  const std::vector<HeatmapImage>* heatmaps = nullptr;
  std::optional<std::vector<std::size_t>> target_paragraphs;
};

// Renders the template for `method`. Density and SVM need an attention
// result; Heatmap needs at least one page image (an attention result is
// optional and only fills focus_sentences); TargetParagraphs needs exactly
// two paragraph indices (0-based, rendered 1-based).
inline PromptBundle build_prompt(MethodKind method, const Document& doc, const PromptInputs& in = {},
                                 const PromptOptions& opt = {}) {
  const PromptTemplates& t = opt.templates ? *opt.templates : PromptTemplates::builtin();
  PromptBundle b;
  b.method = method;
  b.doc_id = doc.doc_id;

  std::map<std::string, std::string> slots{
      {"summary_words", opt.one_fifth_length
                            ? std::to_string((word_count(doc.full_text) + 4) / 5)
                            : std::string("150")},
      {"personalization_requirement", t.personalization_requirement},
      {"comprehensiveness_requirement", t.comprehensiveness_requirement},
      {"quality_requirement", t.quality_requirement},
      {"source_text", doc.full_text}};

  switch (method) {
    case MethodKind::Density:
    case MethodKind::SVM: {
      if (!in.attention) throw MissingInputError(method, "[top-attended sentences]");
      std::string joined;
      for (std::size_t i = 0; i < in.attention->selected_sentences.size(); ++i) {
        if (i) joined += '\n';
        joined += in.attention->selected_sentences[i];
      }
      slots["top_attended_sentences"] = joined;
      b.focus_sentences = in.attention->selected_sentences;
      break;
    }
    case MethodKind::Heatmap:
      if (!in.heatmaps || in.heatmaps->empty()) throw MissingInputError(method, "[Heatmap images]");
      b.images = *in.heatmaps;
      if (in.attention) b.focus_sentences = in.attention->selected_sentences;
      break;
    case MethodKind::TargetParagraphs: {
      if (!in.target_paragraphs || in.target_paragraphs->size() != 2)
        throw MissingInputError(method, "[target paragraph id1] and [target paragraph id2]");
      const auto& tp = *in.target_paragraphs;
      for (auto p : tp) {
        if (p >= doc.layout.paragraphs.size())
          throw std::invalid_argument("target paragraph " + std::to_string(p) + " out of range");
        for (std::size_t s = doc.layout.paragraphs[p].start_sentence; s < doc.layout.paragraphs[p].end_sentence; ++s)
          b.focus_sentences.push_back(doc.layout.sentences[s].text);
      }
      auto label = [&](std::size_t p) { return opt.ordinal_paragraph_ids ? ordinal(p + 1) : std::to_string(p + 1); };
      slots["target_paragraph_1"] = label(tp[0]);
      slots["target_paragraph_2"] = label(tp[1]);
      break;
    }
    case MethodKind::TextOnly:
      break;
  }
  b.text = render_template(t.for_method(method), slots);
  return b;
}

inline json to_json(const PromptBundle& b, bool embed_images = false) {
  json j{{"method", to_string(b.method)},
         {"text", b.text},
         {"doc_id", b.doc_id},
         {"session_id", b.session_id},
         {"focus_sentences", b.focus_sentences},
         {"images", json::array()}};
  for (const auto& img : b.images) {
    json ij{{"page_idx", img.page_idx}, {"legend", img.legend}, {"bytes", img.png_bytes.size()}};
    if (embed_images) ij["png_base64"] = base64_encode(img.png_bytes);
    j["images"].push_back(ij);
  }
  return j;
}

}  // namespace gazesum
