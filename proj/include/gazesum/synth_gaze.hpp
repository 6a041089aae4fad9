#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazesum/common.hpp"
#include "gazesum/gaze_events.hpp"
#include "gazesum/text_layout.hpp"

namespace gazesum {

// Portable draws on top of mt19937_64; the standard distributions are
// implementation-defined and would break cross-platform determinism.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

  // Box-Muller; the spare value is discarded to keep draws position-independent.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 eng_;
};

struct PupilModel {
  bool enabled = true;
  double base_mm = 3.0;
  // Added per unit of sentence weight above 1.
  double per_weight_mm = 0.25;
  double noise_mm = 0.05;
};

struct AttentionProfile {
  // Relative dwell multiplier per sentence.
  std::vector<double> sentence_weights;
  double ms_per_char = 30.0;
  double jitter_sigma_px = 3.0;
  double sample_rate_hz = 60.0;
  std::uint64_t seed = 1;
  double start_ms = 0.0;
  // Per-word probability of splitting the dwell into two fixations.
  double refixation_prob = 0.0;
  // An in-flight sample closer than this to either word center would be
  // absorbed into a fixation, so such transitions carry no sample.
  double min_inflight_offset_px = 50.0;
  PupilModel pupil;

  void validate(const TextLayout& layout) const {
    if (sentence_weights.size() != layout.sentences.size())
      throw std::invalid_argument("profile has " + std::to_string(sentence_weights.size()) + " weights for " +
                                  std::to_string(layout.sentences.size()) + " sentences");
    bool positive = false;
    for (double w : sentence_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("sentence weights must be finite and >= 0");
      if (w > 0.0) positive = true;
    }
    if (!positive) throw std::invalid_argument("attention profile has no positive weight");
    if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("sample rate must be positive");
    if (!(ms_per_char > 0.0)) throw std::invalid_argument("ms_per_char must be positive");
    if (!(jitter_sigma_px >= 0.0)) throw std::invalid_argument("jitter sigma must be >= 0");
    if (!(refixation_prob >= 0.0 && refixation_prob <= 1.0))
      throw std::invalid_argument("refixation probability must be in [0, 1]");
  }
};

// Uniform weights with `target_weight` on every sentence of the given paragraphs.
inline AttentionProfile profile_for_paragraphs(const TextLayout& layout, const std::vector<std::size_t>& paragraphs,
                                               double target_weight, double other_weight = 1.0,
                                               std::uint64_t seed = 1) {
  AttentionProfile p;
  p.seed = seed;
  p.sentence_weights.assign(layout.sentences.size(), other_weight);
  for (auto para : paragraphs) {
    const auto& span = layout.paragraphs.at(para);
    for (std::size_t s = span.start_sentence; s < span.end_sentence; ++s) p.sentence_weights[s] = target_weight;
  }
  return p;
}

inline std::vector<bool> words_of_sentences(const TextLayout& layout, const std::vector<bool>& sentence_mask) {
  std::vector<bool> out(layout.words.size(), false);
  for (std::size_t w = 0; w < layout.words.size(); ++w) out[w] = sentence_mask.at(layout.words[w].sentence_idx);
  return out;
}

// Reads every word with positive sentence weight in order. A word of weight w
// gets round(ms_per_char * char_len * w / period) + 1 samples one period apart
// around its box center, so the detected fixation lasts the intended dwell to
// within half a period. Jitter is Gaussian, truncated at 3 sigma and clipped to
// the page. Adjacent words are joined by one in-flight sample at the midpoint
// of the two centers when that point is at least min_inflight_offset_px from
// both. Short hops and jumps over zero-weight words carry no sample, so
// nothing lands inside skipped boxes. Every transition lasts two periods.
inline std::vector<GazeSample> generate(const AttentionProfile& profile, const TextLayout& layout) {
  if (layout.words.empty()) throw std::invalid_argument("generate: layout has no words");
  profile.validate(layout);
  SynthRng rng(profile.seed);
  const double period = 1000.0 / profile.sample_rate_hz;
  const double sigma = profile.jitter_sigma_px;
  auto jitter = [&] {
    if (sigma == 0.0) return 0.0;
    return std::clamp(rng.normal(), -3.0, 3.0) * sigma;
  };
  auto clip = [&](double v, double hi) { return std::clamp(v, 0.0, hi); };

  std::vector<GazeSample> out;
  std::size_t tick = 0;
  auto emit = [&](double x, double y, std::optional<double> pupil) {
    GazeSample s;
    s.t = profile.start_ms + static_cast<double>(tick++) * period;
    s.x = clip(x, layout.page_w);
    s.y = clip(y, layout.page_h);
    s.pupil = pupil;
    out.push_back(s);
  };
  auto pupil_for = [&](double weight) -> std::optional<double> {
    if (!profile.pupil.enabled) return std::nullopt;
    double noise = profile.pupil.noise_mm * std::clamp(rng.normal(), -3.0, 3.0);
    return profile.pupil.base_mm + profile.pupil.per_weight_mm * (weight - 1.0) + noise;
  };

  std::optional<std::size_t> prev;
  for (std::size_t w = 0; w < layout.words.size(); ++w) {
    const auto& box = layout.words[w];
    double weight = profile.sentence_weights[box.sentence_idx];
    if (weight <= 0.0) continue;
    if (prev) {
      const auto& pb = layout.words[*prev];
      double half = 0.5 * std::hypot(box.cx() - pb.cx(), box.cy() - pb.cy());
      if (*prev + 1 == w && half >= profile.min_inflight_offset_px) {
        emit(0.5 * (pb.cx() + box.cx()), 0.5 * (pb.cy() + box.cy()), pupil_for(weight));
      } else {
        ++tick;
      }
    }
    double dwell = profile.ms_per_char * static_cast<double>(box.char_len) * weight;
    auto m = static_cast<std::size_t>(std::llround(dwell / period)) + 1;
    std::size_t split = m;
    if (profile.refixation_prob > 0.0 && rng.uniform() < profile.refixation_prob && m >= 4) split = m / 2;
    double cy = box.cy();
    for (std::size_t k = 0; k < m; ++k) {
      double cx = box.cx();
      if (split < m) cx = k < split ? box.x0 + (box.x1 - box.x0) / 3.0 : box.x0 + 2.0 * (box.x1 - box.x0) / 3.0;
      double jx = jitter();
      double jy = jitter();
      emit(cx + jx, cy + jy, pupil_for(weight));
    }
    prev = w;
  }
  return out;
}

// ---- fixture layouts ----------------------------------------------------------

struct FixtureOptions {
  GridOptions grid;
  std::uint64_t seed = 7;
  std::size_t min_letters = 5;
  std::size_t max_letters = 11;
};

namespace detail {

inline std::string pseudo_word(SynthRng& rng, std::size_t letters) {
  static constexpr const char* consonants = "bcdfghjklmnprstvwz";
  static constexpr const char* vowels = "aeiou";
  std::string w;
  for (std::size_t i = 0; i < letters; ++i) w += i % 2 == 0 ? consonants[rng.index(18)] : vowels[rng.index(5)];
  return w;
}

}  // namespace detail

// Sentence texts for a nested paragraph -> sentence -> word-count shape. Words
// are distinct pseudo-words of min..max letters, so paragraphs share no
// vocabulary; each sentence starts capitalized and ends with a period.
inline std::vector<std::vector<std::string>> fixture_text(const std::vector<std::vector<std::size_t>>& counts,
                                                          const FixtureOptions& opt = {}) {
  if (counts.empty()) throw std::invalid_argument("fixture needs at least one paragraph");
  if (opt.min_letters < 1 || opt.max_letters < opt.min_letters)
    throw std::invalid_argument("fixture word length range is empty");
  SynthRng rng(opt.seed);
  std::set<std::string> used;
  std::vector<std::vector<std::string>> paragraphs;
  for (const auto& para : counts) {
    if (para.empty()) throw std::invalid_argument("fixture paragraphs need at least one sentence");
    std::vector<std::string> sentences;
    for (std::size_t n_words : para) {
      if (n_words == 0) throw std::invalid_argument("fixture sentences need at least one word");
      std::string s;
      for (std::size_t i = 0; i < n_words; ++i) {
        std::string w;
        do {
          std::size_t len = opt.min_letters + rng.index(opt.max_letters - opt.min_letters + 1);
          w = detail::pseudo_word(rng, len);
        } while (!used.insert(w).second);
        if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        if (i) s += ' ';
        s += w;
      }
      s += '.';
      sentences.push_back(std::move(s));
    }
    paragraphs.push_back(std::move(sentences));
  }
  return paragraphs;
}

inline TextLayout fixture_layout(const std::vector<std::vector<std::size_t>>& counts, const FixtureOptions& opt = {}) {
  return grid_layout(fixture_text(counts, opt), opt.grid);
}

inline std::vector<std::vector<std::size_t>> uniform_counts(std::size_t paragraphs, std::size_t sentences,
                                                            std::size_t words) {
  if (paragraphs == 0 || sentences == 0 || words == 0) throw std::invalid_argument("fixture counts must be positive");
  return std::vector<std::vector<std::size_t>>(paragraphs, std::vector<std::size_t>(sentences, words));
}

inline TextLayout fixture_layout(std::size_t paragraphs, std::size_t sentences, std::size_t words,
                                 const FixtureOptions& opt = {}) {
  return fixture_layout(uniform_counts(paragraphs, sentences, words), opt);
}

inline Document fixture_document(std::size_t paragraphs, std::size_t sentences, std::size_t words,
                                 std::optional<std::vector<std::size_t>> targets, const FixtureOptions& opt = {}) {
  return make_document("fixture-" + std::to_string(opt.seed), fixture_layout(paragraphs, sentences, words, opt),
                       std::move(targets));
}

}  // namespace gazesum
