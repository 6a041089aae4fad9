#pragma once

#include <cmath>
#include <filesystem>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazesum/common.hpp"
#include "gazesum/stats.hpp"

namespace gazesum {

// One tracker sample. Timestamps are milliseconds from session start,
// positions are screen pixels, pupil is a diameter in millimetres.
struct GazeSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  std::optional<double> pupil;
  bool valid = true;

  bool operator==(const GazeSample&) const = default;
};

struct Fixation {
  double start_ms = 0.0;
  double end_ms = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  // Mean pupil diameter of the member samples; z-score after standardize_pupil.
  std::optional<double> mean_pupil;
  std::size_t first_sample = 0;
  std::size_t last_sample = 0;

  double duration_ms() const { return end_ms - start_ms; }
  bool operator==(const Fixation&) const = default;
};

struct Saccade {
  double start_ms = 0.0;
  double end_ms = 0.0;
  double from_x = 0.0, from_y = 0.0;
  double to_x = 0.0, to_y = 0.0;

  double duration_ms() const { return end_ms - start_ms; }
  // Diagnostics only; distance-based metrics are not part of the feature set.
  double amplitude_px() const { return std::hypot(to_x - from_x, to_y - from_y); }
  double angle_deg() const {
    return std::atan2(to_y - from_y, to_x - from_x) * 180.0 / std::numbers::pi;
  }
  bool operator==(const Saccade&) const = default;
};

// Stretch of the trace that is neither fixation nor saccade: lead-in, tail,
// or an interval broken by missing data.
struct Gap {
  double start_ms = 0.0;
  double end_ms = 0.0;
  bool operator==(const Gap&) const = default;
};

struct EventTrace {
  std::vector<Fixation> fixations;
  std::vector<Saccade> saccades;
  std::vector<Gap> gaps;
  std::vector<GazeSample> cleaned_samples;
  bool pupil_standardized = false;

  bool operator==(const EventTrace&) const = default;

  double span_ms() const {
    if (cleaned_samples.size() < 2) return 0.0;
    return cleaned_samples.back().t - cleaned_samples.front().t;
  }
};

struct DetectorConfig {
  double max_dispersion_px = 25.0;
  double min_duration_ms = 50.0;
  // Consecutive samples further apart than this break a fixation.
  double max_sample_gap_ms = 100.0;
};

// Drops invalid samples. An invalid run whose valid neighbours are at most
// max_gap_ms apart is filled by linear interpolation; longer runs and runs at
// either end of the trace are removed, leaving a gap in time.
inline std::vector<GazeSample> clean_trace(std::span<const GazeSample> samples,
                                           double max_gap_ms = 75.0) {
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].t < samples[i - 1].t) {
      std::ostringstream msg;
      msg << "non-monotonic timestamps: sample " << i << " at t=" << samples[i].t
          << " precedes sample " << i - 1 << " at t=" << samples[i - 1].t;
      throw std::invalid_argument(msg.str());
    }
  }
  std::vector<GazeSample> out;
  out.reserve(samples.size());
  std::size_t i = 0;
  while (i < samples.size()) {
    if (samples[i].valid) {
      out.push_back(samples[i]);
      ++i;
      continue;
    }
    std::size_t run_end = i;
    while (run_end < samples.size() && !samples[run_end].valid) ++run_end;
    bool bounded = i > 0 && run_end < samples.size();
    if (bounded) {
      const GazeSample& a = samples[i - 1];
      const GazeSample& b = samples[run_end];
      double span = b.t - a.t;
      if (span <= max_gap_ms) {
        for (std::size_t k = i; k < run_end; ++k) {
          double f = span > 0.0 ? (samples[k].t - a.t) / span : 0.0;
          GazeSample s;
          s.t = samples[k].t;
          s.x = a.x + f * (b.x - a.x);
          s.y = a.y + f * (b.y - a.y);
          if (a.pupil && b.pupil) s.pupil = *a.pupil + f * (*b.pupil - *a.pupil);
          s.valid = true;
          out.push_back(s);
        }
      }
    }
    i = run_end;
  }
  return out;
}

namespace detail {

// True when every sample in [first, last] lies within radius of (cx, cy).
inline bool within_radius(std::span<const GazeSample> s, std::size_t first, std::size_t last,
                          double cx, double cy, double r2) {
  for (std::size_t k = first; k <= last; ++k) {
    double dx = s[k].x - cx, dy = s[k].y - cy;
    if (dx * dx + dy * dy > r2) return false;
  }
  return true;
}

inline Fixation make_fixation(std::span<const GazeSample> s, std::size_t first, std::size_t last,
                              double sx, double sy) {
  Fixation f;
  f.first_sample = first;
  f.last_sample = last;
  f.start_ms = s[first].t;
  f.end_ms = s[last].t;
  double n = static_cast<double>(last - first + 1);
  f.cx = sx / n;
  f.cy = sy / n;
  double psum = 0.0;
  std::size_t pn = 0;
  for (std::size_t k = first; k <= last; ++k) {
    if (s[k].pupil) {
      psum += *s[k].pupil;
      ++pn;
    }
  }
  if (pn) f.mean_pupil = psum / static_cast<double>(pn);
  return f;
}

}  // namespace detail

// Dispersion-threshold identification. Starting at sample i, the window grows
// one sample at a time while every member stays within max_dispersion_px of the
// window centroid (recomputed after each addition) and no inter-sample interval
// exceeds max_sample_gap_ms. A window spanning at least min_duration_ms becomes
// a fixation and scanning resumes after it; otherwise scanning resumes at i+1.
// Intervals between consecutive fixations are saccades unless broken by a data
// gap; everything else in the trace span is recorded as a Gap.
inline EventTrace detect_fixations(std::span<const GazeSample> samples,
                                   const DetectorConfig& cfg = {}) {
  EventTrace trace;
  trace.cleaned_samples.assign(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  if (n < 2) return trace;

  const double r = cfg.max_dispersion_px;
  const double r2 = r * r;
  std::size_t i = 0;
  while (i < n) {
    double sx = samples[i].x, sy = samples[i].y;
    double min_x = sx, max_x = sx, min_y = sy, max_y = sy;
    std::size_t j = i;
    while (j + 1 < n) {
      const GazeSample& next = samples[j + 1];
      if (next.t - samples[j].t > cfg.max_sample_gap_ms) break;
      double nsx = sx + next.x, nsy = sy + next.y;
      double cnt = static_cast<double>(j + 2 - i);
      double cx = nsx / cnt, cy = nsy / cnt;
      double lx = std::min(min_x, next.x), hx = std::max(max_x, next.x);
      double ly = std::min(min_y, next.y), hy = std::max(max_y, next.y);
      // The farthest bounding-box corner bounds every member's distance.
      double fx = std::max(cx - lx, hx - cx), fy = std::max(cy - ly, hy - cy);
      bool ok = fx * fx + fy * fy <= r2 || detail::within_radius(samples, i, j + 1, cx, cy, r2);
      if (!ok) break;
      sx = nsx;
      sy = nsy;
      min_x = lx;
      max_x = hx;
      min_y = ly;
      max_y = hy;
      ++j;
    }
    if (samples[j].t - samples[i].t >= cfg.min_duration_ms) {
      trace.fixations.push_back(detail::make_fixation(samples, i, j, sx, sy));
      i = j + 1;
    } else {
      ++i;
    }
  }

  const double t0 = samples.front().t;
  const double t1 = samples.back().t;
  if (trace.fixations.empty()) {
    if (t1 > t0) trace.gaps.push_back({t0, t1});
    return trace;
  }
  if (trace.fixations.front().start_ms > t0) trace.gaps.push_back({t0, trace.fixations.front().start_ms});
  for (std::size_t k = 0; k + 1 < trace.fixations.size(); ++k) {
    const Fixation& a = trace.fixations[k];
    const Fixation& b = trace.fixations[k + 1];
    if (b.start_ms <= a.end_ms) continue;
    bool broken = false;
    for (std::size_t s = a.last_sample; s < b.first_sample; ++s) {
      if (samples[s + 1].t - samples[s].t > cfg.max_sample_gap_ms) {
        broken = true;
        break;
      }
    }
    if (broken) {
      trace.gaps.push_back({a.end_ms, b.start_ms});
    } else {
      trace.saccades.push_back({a.end_ms, b.start_ms, a.cx, a.cy, b.cx, b.cy});
    }
  }
  if (trace.fixations.back().end_ms < t1) trace.gaps.push_back({trace.fixations.back().end_ms, t1});
  return trace;
}

// Replaces each fixation's mean pupil with its z-score over the session
// (population sd). Fixations without pupil data stay empty and are excluded
// from the statistics. Zero variance maps every value to 0.
inline EventTrace standardize_pupil(EventTrace trace) {
  std::vector<double> values;
  for (const auto& f : trace.fixations)
    if (f.mean_pupil) values.push_back(*f.mean_pupil);
  if (values.empty()) throw std::invalid_argument("standardize_pupil: no fixation carries pupil data");
  double m = stats::mean(values);
  double sd = stats::stddev(values);
  for (auto& f : trace.fixations) {
    if (!f.mean_pupil) continue;
    f.mean_pupil = sd > 0.0 ? (*f.mean_pupil - m) / sd : 0.0;
  }
  trace.pupil_standardized = true;
  return trace;
}

inline bool has_pupil_data(const EventTrace& trace) {
  for (const auto& f : trace.fixations)
    if (f.mean_pupil) return true;
  return false;
}

// ---- serialization -------------------------------------------------------

inline void to_json(json& j, const GazeSample& s) {
  j = json{{"t", s.t}, {"x", s.x}, {"y", s.y}, {"pupil", nullptr}, {"valid", s.valid}};
  if (s.pupil) j["pupil"] = *s.pupil;
}

inline void from_json(const json& j, GazeSample& s) {
  s.t = j.at("t").get<double>();
  s.valid = j.value("valid", true);
  const json& x = j.contains("x") ? j.at("x") : json();
  const json& y = j.contains("y") ? j.at("y") : json();
  if (s.valid && (!x.is_number() || !y.is_number()))
    throw FormatError("valid gaze sample without numeric x/y");
  s.x = number_or(x, 0.0);
  s.y = number_or(y, 0.0);
  if (j.contains("pupil") && j.at("pupil").is_number())
    s.pupil = j.at("pupil").get<double>();
  else
    s.pupil.reset();
}

inline void to_json(json& j, const Fixation& f) {
  j = json{{"start_ms", f.start_ms}, {"end_ms", f.end_ms}, {"duration_ms", f.duration_ms()},
           {"cx", f.cx}, {"cy", f.cy}, {"mean_pupil", nullptr}};
  if (f.mean_pupil) j["mean_pupil"] = *f.mean_pupil;
}

inline void to_json(json& j, const Saccade& s) {
  j = json{{"start_ms", s.start_ms}, {"end_ms", s.end_ms}, {"duration_ms", s.duration_ms()},
           {"from_xy", {s.from_x, s.from_y}}, {"to_xy", {s.to_x, s.to_y}}};
}

inline json to_json(const EventTrace& trace, bool diagnostics = false) {
  json j{{"fixations", trace.fixations}, {"saccades", trace.saccades}, {"gaps", json::array()},
         {"pupil_standardized", trace.pupil_standardized}};
  for (const auto& g : trace.gaps) j["gaps"].push_back({{"start_ms", g.start_ms}, {"end_ms", g.end_ms}});
  if (diagnostics) {
    for (std::size_t k = 0; k < trace.saccades.size(); ++k) {
      j["saccades"][k]["amplitude_px"] = trace.saccades[k].amplitude_px();
      j["saccades"][k]["angle_deg"] = trace.saccades[k].angle_deg();
    }
  }
  return j;
}

inline std::vector<GazeSample> read_gaze_jsonl(std::istream& in) {
  std::vector<GazeSample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line).get<GazeSample>());
    } catch (const std::exception& e) {
      throw FormatError("gaze line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<GazeSample> read_gaze_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_gaze_jsonl(in);
}

inline std::string gaze_to_jsonl(std::span<const GazeSample> samples) {
  std::string out;
  for (const auto& s : samples) {
    out += json(s).dump();
    out += '\n';
  }
  return out;
}

}  // namespace gazesum
