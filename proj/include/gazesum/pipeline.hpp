#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazesum/alignment.hpp"
#include "gazesum/attention_classifier.hpp"
#include "gazesum/gaze_events.hpp"
#include "gazesum/heatmap.hpp"
#include "gazesum/promptgen.hpp"
#include "gazesum/synth_gaze.hpp"
#include "gazesum/text_layout.hpp"

namespace gazesum {

struct PipelineConfig {
  double max_interp_gap_ms = 75.0;
  DetectorConfig detector;
  double snap_px = 20.0;
  double top_fraction = 0.20;
  DensityOptions density;
  double heatmap_sigma_px = 30.0;
  WeightMode heatmap_weight = WeightMode::fixation;
  WindowOptions windows;
  ConfidenceAggregation svm_aggregation = ConfidenceAggregation::max;
  PromptOptions prompt;
};

inline void from_json(const json& j, PipelineConfig& c) {
  c.max_interp_gap_ms = j.value("max_interp_gap_ms", c.max_interp_gap_ms);
  c.detector.max_dispersion_px = j.value("max_dispersion_px", c.detector.max_dispersion_px);
  c.detector.min_duration_ms = j.value("min_duration_ms", c.detector.min_duration_ms);
  c.detector.max_sample_gap_ms = j.value("max_sample_gap_ms", c.detector.max_sample_gap_ms);
  c.snap_px = j.value("snap_px", c.snap_px);
  c.top_fraction = j.value("top_fraction", c.top_fraction);
  if (j.contains("length_unit")) c.density.unit = j["length_unit"] == "words" ? LengthUnit::words : LengthUnit::characters;
  if (j.contains("rank_key")) c.density.key = j["rank_key"] == "dwell" ? RankKey::dwell : RankKey::density;
  c.heatmap_sigma_px = j.value("heatmap_sigma_px", c.heatmap_sigma_px);
  if (j.contains("heatmap_weight"))
    c.heatmap_weight = j["heatmap_weight"] == "sample" ? WeightMode::sample : WeightMode::fixation;
  c.windows.window_ms = j.value("window_ms", c.windows.window_ms);
  c.windows.stride_ms = j.value("stride_ms", c.windows.stride_ms);
  if (j.contains("svm_aggregation"))
    c.svm_aggregation = j["svm_aggregation"] == "mean" ? ConfidenceAggregation::mean : ConfidenceAggregation::max;
  c.prompt.ordinal_paragraph_ids = j.value("ordinal_paragraph_ids", c.prompt.ordinal_paragraph_ids);
  c.prompt.one_fifth_length = j.value("one_fifth_length", c.prompt.one_fifth_length);
}

// clean -> detect -> pupil z-scores (when the tracker reported pupil size).
inline EventTrace process_gaze(std::span<const GazeSample> samples, const PipelineConfig& cfg = {}) {
  auto cleaned = clean_trace(samples, cfg.max_interp_gap_ms);
  EventTrace trace = detect_fixations(cleaned, cfg.detector);
  if (has_pupil_data(trace)) trace = standardize_pupil(std::move(trace));
  return trace;
}

inline AttentionResult density_attention(const EventTrace& trace, const TextLayout& layout,
                                         const PipelineConfig& cfg = {}) {
  auto assignment = assign_fixations(trace, layout, cfg.snap_px);
  return select_top(sentence_density(assignment.word_dwell_ms, layout, cfg.density), layout, cfg.top_fraction,
                    AttentionMethod::density);
}

struct HeatmapOutput {
  std::vector<HeatmapImage> images;
  // Sentences ranked by mean normalized heat.
  AttentionResult attention;
};

inline HeatmapOutput heatmap_attention(const EventTrace& trace, const TextLayout& layout,
                                       const PipelineConfig& cfg = {}) {
  HeatmapOutput out;
  HeatGrid raw = accumulate(trace, layout, cfg.heatmap_weight);
  out.images.push_back(smooth_and_colorize(raw, cfg.heatmap_sigma_px, layout));
  HeatGrid norm = normalize(gaussian_blur(raw, cfg.heatmap_sigma_px));
  out.attention = select_top(sentence_heat(norm, layout), layout, cfg.top_fraction, AttentionMethod::heatmap);
  return out;
}

inline AttentionResult svm_attention(const TrainedClassifier& clf, const EventTrace& trace, const TextLayout& layout,
                                     const PipelineConfig& cfg = {}) {
  auto windows = extract_features(trace, cfg.windows);
  ClassifyOptions opt;
  opt.fraction = cfg.top_fraction;
  opt.snap_px = cfg.snap_px;
  opt.aggregation = cfg.svm_aggregation;
  return classify_sentences(clf, windows, trace, layout, opt);
}

struct MethodInputs {
  const EventTrace* trace = nullptr;
  const TrainedClassifier* classifier = nullptr;
  std::optional<std::vector<std::size_t>> targets;
};

// Everything produced on the way to one prompt.
struct MethodArtifacts {
  PromptBundle bundle;
  std::optional<AttentionResult> attention;
  std::vector<HeatmapImage> heatmaps;
};

inline MethodArtifacts build_method_prompt(MethodKind method, const Document& doc, const MethodInputs& in,
                                           const PipelineConfig& cfg = {}) {
  MethodArtifacts a;
  PromptInputs pin;
  if (needs_gaze(method)) {
    if (!in.trace || in.trace->cleaned_samples.empty())
      throw std::invalid_argument(to_string(method) + " needs a non-empty gaze trace");
  }
  switch (method) {
    case MethodKind::Density:
      a.attention = density_attention(*in.trace, doc.layout, cfg);
      if (a.attention->empty_selection) throw std::invalid_argument("density: no fixation landed on the text");
      pin.attention = &*a.attention;
      break;
    case MethodKind::Heatmap: {
      auto h = heatmap_attention(*in.trace, doc.layout, cfg);
      a.heatmaps = std::move(h.images);
      a.attention = std::move(h.attention);
      pin.heatmaps = &a.heatmaps;
      pin.attention = &*a.attention;
      break;
    }
    case MethodKind::SVM:
      if (!in.classifier) throw std::invalid_argument("svm needs a trained classifier");
      a.attention = svm_attention(*in.classifier, *in.trace, doc.layout, cfg);
      if (a.attention->empty_selection) throw std::invalid_argument("svm: no window was classified as focused");
      pin.attention = &*a.attention;
      break;
    case MethodKind::TargetParagraphs:
      pin.target_paragraphs = in.targets ? in.targets : doc.target_paragraphs;
      break;
    case MethodKind::TextOnly:
      break;
  }
  a.bundle = build_prompt(method, doc, pin, cfg.prompt);
  return a;
}

// ---- synthetic training ---------------------------------------------------------

struct SyntheticTrainingOptions {
  std::size_t sessions = 4;
  std::size_t paragraphs = 6;
  std::size_t sentences = 5;
  std::size_t words = 8;
  double focus_weight = 3.0;
  std::uint64_t seed = 11;
  SvmParams svm;
};

// Labeled windows from synthetic sessions that each focus one paragraph.
inline std::vector<FeatureWindow> synthetic_training_windows(const SyntheticTrainingOptions& opt,
                                                             const PipelineConfig& cfg = {}) {
  std::vector<FeatureWindow> all;
  for (std::size_t s = 0; s < opt.sessions; ++s) {
    FixtureOptions fo;
    fo.seed = opt.seed + 101 * s;
    TextLayout layout = fixture_layout(opt.paragraphs, opt.sentences, opt.words, fo);
    std::size_t focus = s % opt.paragraphs;
    auto profile = profile_for_paragraphs(layout, {focus}, opt.focus_weight, 1.0, opt.seed + 7 * s);
    auto trace = process_gaze(generate(profile, layout), cfg);
    auto assignment = assign_fixations(trace, layout, cfg.snap_px);
    std::vector<bool> mask(layout.sentences.size(), false);
    for (std::size_t i = layout.paragraphs[focus].start_sentence; i < layout.paragraphs[focus].end_sentence; ++i)
      mask[i] = true;
    auto windows = label_windows(extract_features(trace, cfg.windows), trace, assignment,
                                 words_of_sentences(layout, mask));
    all.insert(all.end(), windows.begin(), windows.end());
  }
  return all;
}

inline TrainedClassifier train_synthetic_classifier(const SyntheticTrainingOptions& opt = {},
                                                    const PipelineConfig& cfg = {}) {
  auto windows = synthetic_training_windows(opt, cfg);
  return train(windows, opt.svm);
}

}  // namespace gazesum
