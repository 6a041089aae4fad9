#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazesum/alignment.hpp"
#include "gazesum/gaze_events.hpp"
#include "gazesum/stats.hpp"
#include "gazesum/text_layout.hpp"

namespace gazesum {

inline constexpr std::size_t kFeatureCount = 26;
inline constexpr const char* kFeatureOrderVersion = "gazesum.features.v1";

// Feature layout:
//   [0, 8)   fixation duration  [min, max, mean, median, sd, skewness, kurtosis, range]
//   [8, 16)  saccade duration   (same eight statistics)
//   [16, 24) standardized pupil (same eight statistics, over fixations with pupil data)
//   24       saccade count
//   25       fixation / saccade total-duration ratio
inline const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = [] {
    std::array<std::string, kFeatureCount> n;
    const char* blocks[] = {"fixation_duration", "saccade_duration", "pupil_z"};
    const char* desc[] = {"min", "max", "mean", "median", "sd", "skewness", "kurtosis", "range"};
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t d = 0; d < 8; ++d) n[b * 8 + d] = std::string(blocks[b]) + "_" + desc[d];
    n[24] = "saccade_count";
    n[25] = "fixation_saccade_ratio";
    return n;
  }();
  return names;
}

using FeatureVector = std::array<double, kFeatureCount>;

struct FeatureWindow {
  double start_ms = 0.0;
  double end_ms = 0.0;
  FeatureVector features{};
  std::optional<bool> label;
};

struct WindowOptions {
  double window_ms = 4000.0;
  double stride_ms = 4000.0;
};

namespace detail {

inline bool overlaps(double a0, double a1, double b0, double b1) { return a0 < b1 && a1 > b0; }

inline FeatureVector window_features(const EventTrace& trace, double w0, double w1) {
  std::vector<double> fix, sac, pupil;
  for (const auto& f : trace.fixations) {
    if (!overlaps(f.start_ms, f.end_ms, w0, w1) && !(f.start_ms == f.end_ms && f.start_ms >= w0 && f.start_ms < w1))
      continue;
    fix.push_back(f.duration_ms());
    if (f.mean_pupil) pupil.push_back(*f.mean_pupil);
  }
  for (const auto& s : trace.saccades)
    if (overlaps(s.start_ms, s.end_ms, w0, w1)) sac.push_back(s.duration_ms());
  FeatureVector v{};
  auto put = [&](std::size_t offset, const std::vector<double>& values) {
    auto d = stats::describe(values);
    std::copy(d.begin(), d.end(), v.begin() + static_cast<std::ptrdiff_t>(offset));
  };
  put(0, fix);
  put(8, sac);
  put(16, pupil);
  v[24] = static_cast<double>(sac.size());
  double sac_total = std::accumulate(sac.begin(), sac.end(), 0.0);
  double fix_total = std::accumulate(fix.begin(), fix.end(), 0.0);
  v[25] = sac_total > 0.0 ? fix_total / sac_total : 0.0;
  return v;
}

}  // namespace detail

// Window boundaries [t0 + k*stride, t0 + k*stride + window_ms) covering the
// trace span, t0 being the first sample.
inline std::vector<std::pair<double, double>> window_bounds(const EventTrace& trace, const WindowOptions& opt) {
  if (!(opt.window_ms > 0.0)) throw std::invalid_argument("window_ms must be positive");
  if (!(opt.stride_ms > 0.0)) throw std::invalid_argument("stride_ms must be positive");
  std::vector<std::pair<double, double>> out;
  if (trace.cleaned_samples.empty() && trace.fixations.empty()) return out;
  double t0 = trace.cleaned_samples.empty() ? trace.fixations.front().start_ms : trace.cleaned_samples.front().t;
  double t1 = trace.cleaned_samples.empty() ? trace.fixations.back().end_ms : trace.cleaned_samples.back().t;
  for (std::size_t k = 0;; ++k) {
    double start = t0 + static_cast<double>(k) * opt.stride_ms;
    if (k > 0 && start >= t1) break;
    out.emplace_back(start, start + opt.window_ms);
  }
  return out;
}

// Events overlapping a window contribute their full durations. Empty
// statistics are zero, and the ratio is zero when the window has no saccades.
inline std::vector<FeatureWindow> extract_features(const EventTrace& trace, const WindowOptions& opt = {}) {
  if (!(opt.window_ms > 0.0)) throw std::invalid_argument("window_ms must be positive");
  if (has_pupil_data(trace) && !trace.pupil_standardized)
    throw std::invalid_argument("extract_features: pupil values must be standardized first");
  std::vector<FeatureWindow> out;
  for (auto [w0, w1] : window_bounds(trace, opt)) {
    FeatureWindow fw;
    fw.start_ms = w0;
    fw.end_ms = w1;
    fw.features = detail::window_features(trace, w0, w1);
    out.push_back(fw);
  }
  return out;
}

// A window is positive iff some fixation overlapping it was credited to a
// focused word.
inline std::vector<FeatureWindow> label_windows(std::vector<FeatureWindow> windows, const EventTrace& trace,
                                                const WordAssignment& assignment,
                                                const std::vector<bool>& focused_words) {
  for (auto& w : windows) {
    bool positive = false;
    for (std::size_t f = 0; f < trace.fixations.size() && !positive; ++f) {
      const auto& fx = trace.fixations[f];
      if (!detail::overlaps(fx.start_ms, fx.end_ms, w.start_ms, w.end_ms)) continue;
      const auto& word = assignment.fixation_word[f];
      if (word && *word < focused_words.size() && focused_words[*word]) positive = true;
    }
    w.label = positive;
  }
  return windows;
}

// ---- scaler ---------------------------------------------------------------

struct StandardScaler {
  std::vector<double> mean;
  std::vector<double> sd;

  static StandardScaler fit(std::span<const FeatureWindow> windows) {
    StandardScaler s;
    s.mean.assign(kFeatureCount, 0.0);
    s.sd.assign(kFeatureCount, 1.0);
    if (windows.empty()) return s;
    std::vector<double> col(windows.size());
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      for (std::size_t i = 0; i < windows.size(); ++i) col[i] = windows[i].features[f];
      s.mean[f] = stats::mean(col);
      double sd = stats::stddev(col);
      s.sd[f] = sd > 0.0 ? sd : 1.0;
    }
    return s;
  }

  std::vector<double> transform(const FeatureVector& x) const {
    std::vector<double> out(kFeatureCount);
    for (std::size_t f = 0; f < kFeatureCount; ++f) out[f] = (x[f] - mean[f]) / sd[f];
    return out;
  }
};

// ---- SVM ------------------------------------------------------------------

struct SvmParams {
  double C = 1.0;
  double gamma = 0.01;
  bool balanced = true;
  double tolerance = 1e-3;
  std::size_t max_iterations = 10'000'000;
};

// Class-weighted RBF kernel SVM in dual form:
//   f(x) = sum_i coef_i * exp(-gamma * |sv_i - x|^2) + bias
// with support vectors stored in the standardized feature space.
class TrainedClassifier {
 public:
  double gamma = 0.01;
  double C = 1.0;
  double weight_pos = 1.0;
  double weight_neg = 1.0;
  StandardScaler scaler;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> coefficients;
  double bias = 0.0;
  std::size_t iterations = 0;

  double decision(const FeatureVector& x) const {
    auto z = scaler.transform(x);
    double sum = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i) {
      const auto& sv = support_vectors[i];
      double d2 = 0.0;
      for (std::size_t f = 0; f < kFeatureCount; ++f) d2 += (sv[f] - z[f]) * (sv[f] - z[f]);
      sum += coefficients[i] * std::exp(-gamma * d2);
    }
    return sum;
  }
  bool predict(const FeatureVector& x) const { return decision(x) > 0.0; }

  json to_json() const {
    return json{{"format", "gazesum.svm"},
                {"feature_order_version", kFeatureOrderVersion},
                {"feature_names", feature_names()},
                {"kernel", "rbf"},
                {"gamma", gamma},
                {"C", C},
                {"class_weights", {{"positive", weight_pos}, {"negative", weight_neg}}},
                {"scaler", {{"mean", scaler.mean}, {"sd", scaler.sd}}},
                {"support_vectors", support_vectors},
                {"coefficients", coefficients},
                {"bias", bias}};
  }

  static TrainedClassifier from_json(const json& j) {
    if (j.value("feature_order_version", std::string()) != kFeatureOrderVersion)
      throw FormatError("model feature order version mismatch");
    TrainedClassifier c;
    c.gamma = j.at("gamma").get<double>();
    c.C = j.at("C").get<double>();
    c.weight_pos = j.at("class_weights").at("positive").get<double>();
    c.weight_neg = j.at("class_weights").at("negative").get<double>();
    c.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    c.scaler.sd = j.at("scaler").at("sd").get<std::vector<double>>();
    c.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    c.coefficients = j.at("coefficients").get<std::vector<double>>();
    c.bias = j.at("bias").get<double>();
    if (c.scaler.mean.size() != kFeatureCount || c.scaler.sd.size() != kFeatureCount)
      throw FormatError("model scaler has wrong dimension");
    if (c.support_vectors.size() != c.coefficients.size()) throw FormatError("model coefficient count mismatch");
    for (const auto& sv : c.support_vectors)
      if (sv.size() != kFeatureCount) throw FormatError("support vector has wrong dimension");
    return c;
  }
};

// Balanced weights n / (2 n_c), so w_pos * n_pos == w_neg * n_neg.
inline std::pair<double, double> balanced_class_weights(std::size_t n_pos, std::size_t n_neg) {
  double n = static_cast<double>(n_pos + n_neg);
  return {n / (2.0 * static_cast<double>(n_pos)), n / (2.0 * static_cast<double>(n_neg))};
}

namespace detail {

// Sequential minimal optimization with second-order working-set selection,
// solving min 1/2 a'Qa - e'a s.t. y'a = 0, 0 <= a_i <= C_i.
class SmoSolver {
 public:
  SmoSolver(const std::vector<std::vector<double>>& x, const std::vector<int>& y, const std::vector<double>& upper,
            double gamma, double eps, std::size_t max_iter)
      : x_(x), y_(y), c_(upper), gamma_(gamma), eps_(eps), max_iter_(max_iter), n_(x.size()) {
    if (n_ <= kFullKernelLimit) {
      kernel_.resize(n_ * n_);
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i; j < n_; ++j) kernel_[i * n_ + j] = kernel_[j * n_ + i] = k(i, j);
    }
  }

  void solve() {
    alpha_.assign(n_, 0.0);
    grad_.assign(n_, -1.0);
    std::vector<double> qi(n_), qj(n_);
    for (iterations_ = 0; iterations_ < max_iter_; ++iterations_) {
      std::size_t i = 0, j = 0;
      if (!select(i, j, qi)) break;
      row(j, qj);
      double ci = c_[i], cj = c_[j];
      double old_ai = alpha_[i], old_aj = alpha_[j];
      if (y_[i] != y_[j]) {
        double quad = 2.0 + 2.0 * qi[j];
        if (quad <= 0.0) quad = kTau;
        double delta = (-grad_[i] - grad_[j]) / quad;
        double diff = alpha_[i] - alpha_[j];
        alpha_[i] += delta;
        alpha_[j] += delta;
        if (diff > 0.0) {
          if (alpha_[j] < 0.0) { alpha_[j] = 0.0; alpha_[i] = diff; }
        } else {
          if (alpha_[i] < 0.0) { alpha_[i] = 0.0; alpha_[j] = -diff; }
        }
        if (diff > ci - cj) {
          if (alpha_[i] > ci) { alpha_[i] = ci; alpha_[j] = ci - diff; }
        } else {
          if (alpha_[j] > cj) { alpha_[j] = cj; alpha_[i] = cj + diff; }
        }
      } else {
        double quad = 2.0 - 2.0 * qi[j];
        if (quad <= 0.0) quad = kTau;
        double delta = (grad_[i] - grad_[j]) / quad;
        double sum = alpha_[i] + alpha_[j];
        alpha_[i] -= delta;
        alpha_[j] += delta;
        if (sum > ci) {
          if (alpha_[i] > ci) { alpha_[i] = ci; alpha_[j] = sum - ci; }
        } else {
          if (alpha_[j] < 0.0) { alpha_[j] = 0.0; alpha_[i] = sum; }
        }
        if (sum > cj) {
          if (alpha_[j] > cj) { alpha_[j] = cj; alpha_[i] = sum - cj; }
        } else {
          if (alpha_[i] < 0.0) { alpha_[i] = 0.0; alpha_[j] = sum; }
        }
      }
      double dai = alpha_[i] - old_ai, daj = alpha_[j] - old_aj;
      for (std::size_t t = 0; t < n_; ++t) grad_[t] += qi[t] * dai + qj[t] * daj;
    }
  }

  // Offset b of the decision function sum_i a_i y_i K(x_i, x) + b.
  double bias() const {
    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      double yg = y_[i] * grad_[i];
      if (at_upper(i)) {
        if (y_[i] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (at_lower(i)) {
        if (y_[i] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
    return -rho;
  }

  const std::vector<double>& alpha() const { return alpha_; }
  std::size_t iterations() const { return iterations_; }

 private:
  static constexpr double kTau = 1e-12;
  static constexpr std::size_t kFullKernelLimit = 4000;

  double k(std::size_t a, std::size_t b) const {
    double d2 = 0.0;
    const auto& xa = x_[a];
    const auto& xb = x_[b];
    for (std::size_t f = 0; f < xa.size(); ++f) d2 += (xa[f] - xb[f]) * (xa[f] - xb[f]);
    return std::exp(-gamma_ * d2);
  }

  // Q_it = y_i y_t K(i, t)
  void row(std::size_t i, std::vector<double>& out) const {
    for (std::size_t t = 0; t < n_; ++t) {
      double kv = kernel_.empty() ? k(i, t) : kernel_[i * n_ + t];
      out[t] = y_[i] * y_[t] * kv;
    }
  }

  bool at_upper(std::size_t i) const { return alpha_[i] >= c_[i]; }
  bool at_lower(std::size_t i) const { return alpha_[i] <= 0.0; }

  bool select(std::size_t& out_i, std::size_t& out_j, std::vector<double>& qi) const {
    double gmax = -std::numeric_limits<double>::infinity(), gmax2 = gmax;
    std::ptrdiff_t gmax_idx = -1, gmin_idx = -1;
    double obj_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n_; ++t) {
      if (y_[t] == 1) {
        if (!at_upper(t) && -grad_[t] >= gmax) { gmax = -grad_[t]; gmax_idx = static_cast<std::ptrdiff_t>(t); }
      } else {
        if (!at_lower(t) && grad_[t] >= gmax) { gmax = grad_[t]; gmax_idx = static_cast<std::ptrdiff_t>(t); }
      }
    }
    if (gmax_idx < 0) return false;
    auto i = static_cast<std::size_t>(gmax_idx);
    row(i, qi);
    for (std::size_t j = 0; j < n_; ++j) {
      if (y_[j] == 1) {
        if (at_lower(j)) continue;
        double grad_diff = gmax + grad_[j];
        gmax2 = std::max(gmax2, grad_[j]);
        if (grad_diff > 0.0) {
          double quad = 2.0 - 2.0 * y_[i] * qi[j];
          double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
          if (obj <= obj_min) { gmin_idx = static_cast<std::ptrdiff_t>(j); obj_min = obj; }
        }
      } else {
        if (at_upper(j)) continue;
        double grad_diff = gmax - grad_[j];
        gmax2 = std::max(gmax2, -grad_[j]);
        if (grad_diff > 0.0) {
          double quad = 2.0 + 2.0 * y_[i] * qi[j];
          double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
          if (obj <= obj_min) { gmin_idx = static_cast<std::ptrdiff_t>(j); obj_min = obj; }
        }
      }
    }
    if (gmax + gmax2 < eps_ || gmin_idx < 0) return false;
    out_i = i;
    out_j = static_cast<std::size_t>(gmin_idx);
    return true;
  }

  const std::vector<std::vector<double>>& x_;
  const std::vector<int>& y_;
  const std::vector<double>& c_;
  double gamma_;
  double eps_;
  std::size_t max_iter_;
  std::size_t n_;
  std::vector<double> kernel_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
  std::size_t iterations_ = 0;
};

}  // namespace detail

// Fits the scaler on the training windows, then solves the class-weighted
// soft-margin RBF SVM. Deterministic for a given window order.
inline TrainedClassifier train(std::span<const FeatureWindow> windows, const SvmParams& params = {}) {
  std::size_t n_pos = 0, n_neg = 0;
  for (const auto& w : windows) {
    if (!w.label) throw std::invalid_argument("train: every window needs a label");
    (*w.label ? n_pos : n_neg)++;
  }
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("train: both classes must be present");

  TrainedClassifier clf;
  clf.gamma = params.gamma;
  clf.C = params.C;
  if (params.balanced) std::tie(clf.weight_pos, clf.weight_neg) = balanced_class_weights(n_pos, n_neg);
  clf.scaler = StandardScaler::fit(windows);

  std::vector<std::vector<double>> x;
  std::vector<int> y;
  std::vector<double> upper;
  x.reserve(windows.size());
  for (const auto& w : windows) {
    x.push_back(clf.scaler.transform(w.features));
    y.push_back(*w.label ? 1 : -1);
    upper.push_back(params.C * (*w.label ? clf.weight_pos : clf.weight_neg));
  }
  detail::SmoSolver solver(x, y, upper, params.gamma, params.tolerance, params.max_iterations);
  solver.solve();
  clf.iterations = solver.iterations();
  clf.bias = solver.bias();
  const auto& alpha = solver.alpha();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (alpha[i] <= 0.0) continue;
    clf.support_vectors.push_back(x[i]);
    clf.coefficients.push_back(alpha[i] * y[i]);
  }
  return clf;
}

inline double accuracy(const TrainedClassifier& clf, std::span<const FeatureWindow> windows) {
  if (windows.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& w : windows)
    if (w.label && clf.predict(w.features) == *w.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(windows.size());
}

// ---- window -> sentence lifting --------------------------------------------

enum class ConfidenceAggregation { max, mean };

struct ClassifyOptions {
  double fraction = 0.20;
  double snap_px = 20.0;
  ConfidenceAggregation aggregation = ConfidenceAggregation::max;
};

// A window covers a sentence when a fixation overlapping the window is
// credited to one of the sentence's words. Sentence confidence aggregates the
// decision values of covering windows predicted positive; sentences without
// one score -inf and are never selected.
inline AttentionResult classify_sentences(const TrainedClassifier& clf, std::span<const FeatureWindow> windows,
                                          const EventTrace& trace, const TextLayout& layout,
                                          const ClassifyOptions& opt = {}) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  WordAssignment assignment = assign_fixations(trace, layout, opt.snap_px);
  std::vector<double> conf(layout.sentences.size(), neg_inf);
  std::vector<double> sum(layout.sentences.size(), 0.0);
  std::vector<std::size_t> count(layout.sentences.size(), 0);
  for (const auto& w : windows) {
    double d = clf.decision(w.features);
    if (!(d > 0.0)) continue;
    std::vector<bool> covered(layout.sentences.size(), false);
    for (std::size_t f = 0; f < trace.fixations.size(); ++f) {
      const auto& fx = trace.fixations[f];
      if (!detail::overlaps(fx.start_ms, fx.end_ms, w.start_ms, w.end_ms)) continue;
      if (auto s = assignment.sentence_of_fixation(f, layout)) covered[*s] = true;
    }
    for (std::size_t s = 0; s < covered.size(); ++s) {
      if (!covered[s]) continue;
      conf[s] = std::max(conf[s], d);
      sum[s] += d;
      ++count[s];
    }
  }
  std::vector<SentenceAttention> per(layout.sentences.size());
  auto dens = sentence_density(assignment.word_dwell_ms, layout);
  for (std::size_t s = 0; s < per.size(); ++s) {
    per[s] = dens[s];
    if (opt.aggregation == ConfidenceAggregation::max)
      per[s].score = conf[s];
    else
      per[s].score = count[s] ? sum[s] / static_cast<double>(count[s]) : neg_inf;
  }
  AttentionResult r;
  r.method = AttentionMethod::svm;
  std::vector<double> scores;
  for (const auto& a : per) scores.push_back(a.score);
  r.selected_indices = rank_top(scores, opt.fraction);
  for (auto i : r.selected_indices) {
    per[i].selected = true;
    r.selected_sentences.push_back(layout.sentences[i].text);
  }
  r.per_sentence = std::move(per);
  r.empty_selection = r.selected_indices.empty();
  return r;
}

inline json to_json(const FeatureWindow& w) {
  json j{{"start_ms", w.start_ms}, {"end_ms", w.end_ms}, {"features", w.features}, {"label", nullptr}};
  if (w.label) j["label"] = *w.label;
  return j;
}

inline FeatureWindow feature_window_from_json(const json& j) {
  FeatureWindow w;
  w.start_ms = j.value("start_ms", 0.0);
  w.end_ms = j.value("end_ms", 0.0);
  auto f = j.at("features").get<std::vector<double>>();
  if (f.size() != kFeatureCount) throw FormatError("feature window must have 26 features");
  std::copy(f.begin(), f.end(), w.features.begin());
  if (j.contains("label") && j.at("label").is_boolean()) w.label = j.at("label").get<bool>();
  return w;
}

}  // namespace gazesum
