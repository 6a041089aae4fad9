#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazesum/alignment.hpp"
#include "gazesum/gaze_events.hpp"
#include "gazesum/png.hpp"
#include "gazesum/text_layout.hpp"

namespace gazesum {

// Per-pixel attention intensity over one page.
struct HeatGrid {
  int w = 0;
  int h = 0;
  std::vector<double> values;
  // Max value used for scaling; 0 until normalized or when the field is empty.
  double normalization = 0.0;

  HeatGrid() = default;
  HeatGrid(int width, int height) : w(width), h(height), values(static_cast<std::size_t>(width) * height, 0.0) {}

  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * w + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * w + x]; }
  double total() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  double max() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }
};

struct Raster {
  int w = 0;
  int h = 0;
  std::vector<std::uint8_t> rgb;

  Raster() = default;
  Raster(int width, int height, std::uint8_t fill = 255)
      : w(width), h(height), rgb(static_cast<std::size_t>(width) * height * 3, fill) {}

  std::uint8_t* px(int x, int y) { return &rgb[(static_cast<std::size_t>(y) * w + x) * 3]; }
  const std::uint8_t* px(int x, int y) const { return &rgb[(static_cast<std::size_t>(y) * w + x) * 3]; }
  bool operator==(const Raster&) const = default;
};

struct HeatmapImage {
  std::size_t page_idx = 0;
  std::vector<std::uint8_t> png_bytes;
  std::string legend;
};

inline const std::string& heatmap_legend() {
  static const std::string legend =
      "Bright and warm colors like red or orange mean the user spends more time on it, and dim and cold "
      "colors like blue mean the user spends less time on it.";
  return legend;
}

inline const std::string& empty_heatmap_legend() {
  static const std::string legend = "No gaze was recorded on this page; every region is cold (blue).";
  return legend;
}

enum class WeightMode { fixation, sample };

namespace detail {

inline HeatGrid empty_grid(const TextLayout& layout) {
  int w = static_cast<int>(std::ceil(layout.page_w));
  int h = static_cast<int>(std::ceil(layout.page_h));
  if (w <= 0 || h <= 0) throw std::invalid_argument("heatmap: zero-size page");
  return HeatGrid(w, h);
}

inline void deposit(HeatGrid& g, double x, double y, double weight) {
  if (!(x >= 0.0 && y >= 0.0)) return;
  int ix = static_cast<int>(std::floor(x));
  int iy = static_cast<int>(std::floor(y));
  if (ix >= g.w || iy >= g.h) return;
  g.at(ix, iy) += weight;
}

}  // namespace detail

// Each fixation deposits its duration at the pixel holding its centroid.
// Points off the page are dropped.
inline HeatGrid accumulate(std::span<const Fixation> fixations, const TextLayout& layout) {
  HeatGrid g = detail::empty_grid(layout);
  for (const auto& f : fixations) detail::deposit(g, f.cx, f.cy, f.duration_ms());
  return g;
}

// Each valid sample deposits the interval to the next sample, capped at
// max_interval_ms so dropouts do not pile weight on one point. The last
// sample reuses the preceding interval.
inline HeatGrid accumulate(std::span<const GazeSample> samples, const TextLayout& layout,
                           double max_interval_ms = 100.0) {
  HeatGrid g = detail::empty_grid(layout);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].valid) continue;
    double dt = 0.0;
    if (i + 1 < samples.size())
      dt = samples[i + 1].t - samples[i].t;
    else if (i > 0)
      dt = samples[i].t - samples[i - 1].t;
    detail::deposit(g, samples[i].x, samples[i].y, std::min(dt, max_interval_ms));
  }
  return g;
}

inline HeatGrid accumulate(const EventTrace& trace, const TextLayout& layout, WeightMode mode) {
  return mode == WeightMode::fixation ? accumulate(std::span<const Fixation>(trace.fixations), layout)
                                      : accumulate(std::span<const GazeSample>(trace.cleaned_samples), layout);
}

// Normalized Gaussian taps for offsets -radius..radius, radius = ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable Gaussian blur truncated at 3 sigma. Mass that would land off the
// page is discarded, so totals are conserved only for masses at least 3 sigma
// from every edge.
inline HeatGrid gaussian_blur(const HeatGrid& in, double sigma) {
  auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  HeatGrid tmp(in.w, in.h), out(in.w, in.h);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      double v = in.at(x, y);
      if (v == 0.0) continue;
      for (int d = -r; d <= r; ++d) {
        int xx = x + d;
        if (xx >= 0 && xx < in.w) tmp.at(xx, y) += v * k[static_cast<std::size_t>(d + r)];
      }
    }
  }
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      double v = tmp.at(x, y);
      if (v == 0.0) continue;
      for (int d = -r; d <= r; ++d) {
        int yy = y + d;
        if (yy >= 0 && yy < in.h) out.at(x, yy) += v * k[static_cast<std::size_t>(d + r)];
      }
    }
  }
  return out;
}

// Scales into [0, 1] by the page maximum; an all-zero field stays zero.
inline HeatGrid normalize(HeatGrid g) {
  double m = g.max();
  g.normalization = m;
  if (m > 0.0)
    for (double& v : g.values) v /= m;
  return g;
}

// blue -> cyan -> green -> yellow -> red over [0, 1].
inline std::array<std::uint8_t, 3> colormap(double v) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{
      {0, 0, 255}, {0, 255, 255}, {0, 255, 0}, {255, 255, 0}, {255, 0, 0}}};
  v = std::clamp(v, 0.0, 1.0);
  double pos = v * 4.0;
  auto i = std::min<std::size_t>(static_cast<std::size_t>(pos), 3);
  double f = pos - static_cast<double>(i);
  std::array<std::uint8_t, 3> c{};
  for (std::size_t ch = 0; ch < 3; ++ch)
    c[ch] = static_cast<std::uint8_t>(std::lround(stops[i][ch] + f * (stops[i + 1][ch] - stops[i][ch])));
  return c;
}

// White page with light gray word boxes; stands in for a screenshot.
inline Raster word_box_raster(const TextLayout& layout) {
  HeatGrid dims = detail::empty_grid(layout);
  Raster r(dims.w, dims.h, 255);
  for (const auto& w : layout.words) {
    int x0 = std::max(0, static_cast<int>(std::floor(w.x0)));
    int x1 = std::min(r.w, static_cast<int>(std::ceil(w.x1)));
    int y0 = std::max(0, static_cast<int>(std::floor(w.y0)));
    int y1 = std::min(r.h, static_cast<int>(std::ceil(w.y1)));
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) {
        auto* p = r.px(x, y);
        p[0] = p[1] = p[2] = 200;
      }
  }
  return r;
}

struct OverlayOptions {
  double max_alpha = 0.6;
  // Normalized intensities below this stay fully transparent.
  double transparent_below = 0.05;
};

// Alpha-blends the colorized normalized grid over the base raster.
inline Raster overlay(const HeatGrid& normalized, const Raster& base, const OverlayOptions& opt = {}) {
  if (normalized.w != base.w || normalized.h != base.h)
    throw std::invalid_argument("overlay: heat grid and base image differ in size");
  Raster out = base;
  for (int y = 0; y < base.h; ++y) {
    for (int x = 0; x < base.w; ++x) {
      double v = normalized.at(x, y);
      if (v < opt.transparent_below) continue;
      double a = opt.max_alpha * v;
      auto c = colormap(v);
      auto* p = out.px(x, y);
      for (int ch = 0; ch < 3; ++ch)
        p[ch] = static_cast<std::uint8_t>(std::lround((1.0 - a) * p[ch] + a * c[static_cast<std::size_t>(ch)]));
    }
  }
  return out;
}

// Blurs, normalizes, colorizes and encodes one page. Without a base image a
// word-box raster of the layout is used. An all-zero grid returns the base
// image unchanged with the all-cold legend.
inline HeatmapImage smooth_and_colorize(const HeatGrid& grid, double sigma_px, const TextLayout& layout,
                                        const std::optional<Raster>& base_image = std::nullopt,
                                        std::size_t page_idx = 0, const OverlayOptions& opt = {}) {
  Raster base = base_image ? *base_image : word_box_raster(layout);
  HeatmapImage img;
  img.page_idx = page_idx;
  HeatGrid smoothed = normalize(gaussian_blur(grid, sigma_px));
  if (smoothed.normalization <= 0.0) {
    img.png_bytes = png::encode_rgb(static_cast<std::uint32_t>(base.w), static_cast<std::uint32_t>(base.h), base.rgb);
    img.legend = empty_heatmap_legend();
    return img;
  }
  Raster composite = overlay(smoothed, base, opt);
  img.png_bytes = png::encode_rgb(static_cast<std::uint32_t>(composite.w), static_cast<std::uint32_t>(composite.h),
                                  composite.rgb);
  img.legend = heatmap_legend();
  return img;
}

// Mean normalized heat over each sentence's word boxes. This is the sentence
// ranking a reader of the heatmap would arrive at, exposed for diagnostics and
// for offline mock backends that cannot look at images.
inline std::vector<SentenceAttention> sentence_heat(const HeatGrid& normalized, const TextLayout& layout) {
  std::vector<SentenceAttention> out(layout.sentences.size());
  for (std::size_t s = 0; s < layout.sentences.size(); ++s) {
    double sum = 0.0;
    double area = 0.0;
    for (std::size_t w = layout.sentences[s].start_word; w < layout.sentences[s].end_word; ++w) {
      const auto& b = layout.words[w];
      int x0 = std::max(0, static_cast<int>(std::floor(b.x0)));
      int x1 = std::min(normalized.w, static_cast<int>(std::ceil(b.x1)));
      int y0 = std::max(0, static_cast<int>(std::floor(b.y0)));
      int y1 = std::min(normalized.h, static_cast<int>(std::ceil(b.y1)));
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
          sum += normalized.at(x, y);
          area += 1.0;
        }
    }
    out[s].sentence_idx = s;
    out[s].score = area > 0.0 ? sum / area : 0.0;
    out[s].density = out[s].score;
  }
  return out;
}

}  // namespace gazesum
