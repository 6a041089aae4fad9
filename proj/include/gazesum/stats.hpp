#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace gazesum::stats {

inline double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double median(std::span<const double> v) {
  if (v.empty()) return 0.0;
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  std::size_t n = s.size();
  return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

// Population (ddof = 0) standard deviation.
inline double stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

// Order of the eight-statistic block used throughout the feature vector.
enum Descriptor : std::size_t { kMin, kMax, kMean, kMedian, kSd, kSkew, kKurt, kRange, kDescriptorCount };

// [min, max, mean, median, sd, skewness, kurtosis, range] with population moments.
// Skewness is Fisher-Pearson g1 = m3 / m2^1.5, kurtosis is excess m4 / m2^2 - 3.
// Empty input yields zeros; zero variance yields sd = skew = kurt = 0.
inline std::array<double, kDescriptorCount> describe(std::span<const double> v) {
  std::array<double, kDescriptorCount> out{};
  if (v.empty()) return out;
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double m = mean(v);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : v) {
    double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  double n = static_cast<double>(v.size());
  m2 /= n;
  m3 /= n;
  m4 /= n;
  out[kMin] = *lo;
  out[kMax] = *hi;
  out[kMean] = m;
  out[kMedian] = median(v);
  out[kRange] = *hi - *lo;
  if (m2 > 0.0) {
    out[kSd] = std::sqrt(m2);
    out[kSkew] = m3 / std::pow(m2, 1.5);
    out[kKurt] = m4 / (m2 * m2) - 3.0;
  }
  return out;
}

}  // namespace gazesum::stats
