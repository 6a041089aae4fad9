#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazesum/gaze_events.hpp"
#include "gazesum/text_layout.hpp"

namespace gazesum {

// Result of crediting fixations to words.
struct WordAssignment {
  std::vector<double> word_dwell_ms;
  // Word index per fixation, empty when unassigned.
  std::vector<std::optional<std::size_t>> fixation_word;
  double unassigned_ms = 0.0;
  std::size_t unassigned_count = 0;

  std::optional<std::size_t> sentence_of_fixation(std::size_t f, const TextLayout& layout) const {
    if (!fixation_word[f]) return std::nullopt;
    return layout.words[*fixation_word[f]].sentence_idx;
  }
};

// Each fixation's full duration goes to the word whose box contains its
// centroid, else to the nearest box within snap_px (lowest index on ties),
// else to the unassigned bucket.
inline WordAssignment assign_fixations(const EventTrace& trace, const TextLayout& layout,
                                       double snap_px = 20.0) {
  if (layout.words.empty()) throw std::invalid_argument("assign_fixations: layout has no words");
  WordAssignment out;
  out.word_dwell_ms.assign(layout.words.size(), 0.0);
  out.fixation_word.reserve(trace.fixations.size());
  for (const auto& f : trace.fixations) {
    std::optional<std::size_t> hit;
    for (std::size_t w = 0; w < layout.words.size(); ++w) {
      if (layout.words[w].contains(f.cx, f.cy)) {
        hit = w;
        break;
      }
    }
    if (!hit) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t w = 0; w < layout.words.size(); ++w) {
        double d = layout.words[w].distance(f.cx, f.cy);
        if (d < best) {
          best = d;
          hit = w;
        }
      }
      if (best > snap_px) hit.reset();
    }
    out.fixation_word.push_back(hit);
    if (hit) {
      out.word_dwell_ms[*hit] += f.duration_ms();
    } else {
      out.unassigned_ms += f.duration_ms();
      ++out.unassigned_count;
    }
  }
  return out;
}

enum class AttentionMethod { density, svm, heatmap };

inline std::string to_string(AttentionMethod m) {
  switch (m) {
    case AttentionMethod::density: return "density";
    case AttentionMethod::svm: return "svm";
    case AttentionMethod::heatmap: return "heatmap";
  }
  return "unknown";
}

struct SentenceAttention {
  std::size_t sentence_idx = 0;
  double dwell_ms = 0.0;
  // Dwell per unit of sentence length (ms per character by default).
  double density = 0.0;
  // The value used for ranking: density, dwell, classifier confidence or heat.
  double score = 0.0;
  bool selected = false;
};

struct AttentionResult {
  AttentionMethod method = AttentionMethod::density;
  std::vector<SentenceAttention> per_sentence;
  // Selected sentences in score order (descending, ties by document order).
  std::vector<std::size_t> selected_indices;
  std::vector<std::string> selected_sentences;
  // Set when nothing could be selected (no gaze, or no positive window).
  bool empty_selection = false;
};

enum class LengthUnit { characters, words };
enum class RankKey { density, dwell };

struct DensityOptions {
  LengthUnit unit = LengthUnit::characters;
  RankKey key = RankKey::density;
};

inline std::vector<SentenceAttention> sentence_density(std::span<const double> word_dwell_ms,
                                                       const TextLayout& layout,
                                                       const DensityOptions& opt = {}) {
  if (word_dwell_ms.size() != layout.words.size())
    throw std::invalid_argument("sentence_density: dwell map does not match the layout");
  std::vector<SentenceAttention> out(layout.sentences.size());
  for (std::size_t s = 0; s < layout.sentences.size(); ++s) {
    const auto& span = layout.sentences[s];
    auto& a = out[s];
    a.sentence_idx = s;
    for (std::size_t w = span.start_word; w < span.end_word; ++w) a.dwell_ms += word_dwell_ms[w];
    double len = opt.unit == LengthUnit::characters ? static_cast<double>(layout.sentence_char_len(s))
                                                    : static_cast<double>(layout.sentence_word_count(s));
    if (len <= 0.0) throw std::invalid_argument("sentence " + std::to_string(s) + " has zero length");
    a.density = a.dwell_ms / len;
    a.score = opt.key == RankKey::density ? a.density : a.dwell_ms;
  }
  return out;
}

inline std::size_t top_count(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must be in (0, 1]");
  auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

// Indices of the k = ceil(fraction * n) highest finite scores, descending,
// ties broken by lower index. Scores that are -inf never qualify.
inline std::vector<std::size_t> rank_top(std::span<const double> scores, double fraction) {
  if (scores.empty()) throw std::invalid_argument("rank_top: no sentences");
  std::size_t k = top_count(scores.size(), fraction);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (std::isfinite(scores[i])) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  if (order.size() > k) order.resize(k);
  return order;
}

// Marks the top fraction of sentences by score. When every score is zero (no
// gaze at all) nothing is selected and the result is flagged.
inline AttentionResult select_top(std::vector<SentenceAttention> per_sentence, const TextLayout& layout,
                                  double fraction = 0.20,
                                  AttentionMethod method = AttentionMethod::density) {
  if (per_sentence.empty()) throw std::invalid_argument("select_top: no sentences");
  AttentionResult r;
  r.method = method;
  std::vector<double> scores;
  scores.reserve(per_sentence.size());
  bool any_signal = false;
  for (const auto& a : per_sentence) {
    scores.push_back(a.score);
    if (std::isfinite(a.score) && a.score > 0.0) any_signal = true;
  }
  if (any_signal) r.selected_indices = rank_top(scores, fraction);
  for (auto& a : per_sentence) a.selected = false;
  for (auto i : r.selected_indices) {
    per_sentence[i].selected = true;
    r.selected_sentences.push_back(layout.sentences.at(per_sentence[i].sentence_idx).text);
  }
  r.per_sentence = std::move(per_sentence);
  r.empty_selection = r.selected_indices.empty();
  return r;
}

inline json to_json(const AttentionResult& r) {
  json j{{"method", to_string(r.method)},
         {"per_sentence", json::array()},
         {"selected_indices", r.selected_indices},
         {"selected_sentences", r.selected_sentences},
         {"empty_selection", r.empty_selection}};
  for (const auto& a : r.per_sentence) {
    j["per_sentence"].push_back({{"sentence_idx", a.sentence_idx},
                                 {"dwell_ms", a.dwell_ms},
                                 {"density", a.density},
                                 {"score", finite_or_null(a.score)},
                                 {"selected", a.selected}});
  }
  return j;
}

inline AttentionResult attention_from_json(const json& j) {
  AttentionResult r;
  std::string m = j.value("method", std::string("density"));
  r.method = m == "svm" ? AttentionMethod::svm : m == "heatmap" ? AttentionMethod::heatmap : AttentionMethod::density;
  for (const auto& a : j.at("per_sentence")) {
    SentenceAttention s;
    s.sentence_idx = a.at("sentence_idx").get<std::size_t>();
    s.dwell_ms = a.value("dwell_ms", 0.0);
    s.density = a.value("density", 0.0);
    s.score = number_or(a.at("score"), -std::numeric_limits<double>::infinity());
    s.selected = a.value("selected", false);
    r.per_sentence.push_back(s);
  }
  r.selected_indices = j.at("selected_indices").get<std::vector<std::size_t>>();
  r.selected_sentences = j.at("selected_sentences").get<std::vector<std::string>>();
  r.empty_selection = j.value("empty_selection", r.selected_indices.empty());
  return r;
}

}  // namespace gazesum
