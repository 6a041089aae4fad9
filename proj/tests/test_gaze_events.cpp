#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "gazesum/gaze_events.hpp"
#include "test_support.hpp"

using namespace gazesum;

namespace {

GazeSample at(double t, double x, double y, std::optional<double> pupil = std::nullopt, bool valid = true) {
  GazeSample s;
  s.t = t;
  s.x = x;
  s.y = y;
  s.pupil = pupil;
  s.valid = valid;
  return s;
}

std::vector<GazeSample> dwell(double t0, double x, double y, int n, double period = 10.0) {
  std::vector<GazeSample> out;
  for (int k = 0; k < n; ++k) out.push_back(at(t0 + k * period, x, y, 3.0));
  return out;
}

}  // namespace

TEST(CleanTrace, InterpolatesShortInvalidRun) {
  std::vector<GazeSample> s{at(0, 0, 0), at(10, 0, 0, {}, false), at(20, 0, 0, {}, false), at(30, 30, 60)};
  auto c = clean_trace(s);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_DOUBLE_EQ(c[1].x, 10.0);
  EXPECT_DOUBLE_EQ(c[2].y, 40.0);
  EXPECT_TRUE(c[1].valid);
}

TEST(CleanTrace, DropsLongRunsAndEdges) {
  std::vector<GazeSample> s{at(0, 0, 0, {}, false), at(10, 1, 1), at(50, 0, 0, {}, false), at(100, 0, 0, {}, false),
                            at(120, 2, 2), at(130, 0, 0, {}, false)};
  auto c = clean_trace(s);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_DOUBLE_EQ(c[0].t, 10.0);
  EXPECT_DOUBLE_EQ(c[1].t, 120.0);
}

TEST(CleanTrace, RejectsNonMonotonicTimestamps) {
  std::vector<GazeSample> s{at(0, 0, 0), at(20, 0, 0), at(10, 0, 0)};
  try {
    clean_trace(s);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("sample 2"), std::string::npos);
  }
}

TEST(DetectFixations, TwoDwellsGiveTwoFixationsAndOneSaccade) {
  auto s = dwell(0, 100, 100, 11);
  auto b = dwell(130, 400, 100, 11);
  s.insert(s.end(), b.begin(), b.end());
  auto tr = detect_fixations(s);
  ASSERT_EQ(tr.fixations.size(), 2u);
  EXPECT_DOUBLE_EQ(tr.fixations[0].duration_ms(), 100.0);
  EXPECT_DOUBLE_EQ(tr.fixations[1].start_ms, 130.0);
  ASSERT_EQ(tr.saccades.size(), 1u);
  EXPECT_DOUBLE_EQ(tr.saccades[0].duration_ms(), 30.0);
  EXPECT_DOUBLE_EQ(tr.saccades[0].amplitude_px(), 300.0);
  EXPECT_TRUE(tr.gaps.empty());
}

TEST(DetectFixations, ShortDwellIsNotAFixation) {
  auto s = dwell(0, 100, 100, 4);  // 30 ms
  EXPECT_TRUE(detect_fixations(s).fixations.empty());
}

TEST(DetectFixations, SampleGapBreaksWindowAndSaccade) {
  auto s = dwell(0, 100, 100, 8);
  auto b = dwell(300, 100, 100, 8);
  s.insert(s.end(), b.begin(), b.end());
  auto tr = detect_fixations(s);
  ASSERT_EQ(tr.fixations.size(), 2u);
  EXPECT_TRUE(tr.saccades.empty());
  ASSERT_EQ(tr.gaps.size(), 1u);
  EXPECT_DOUBLE_EQ(tr.gaps[0].start_ms, 70.0);
  EXPECT_DOUBLE_EQ(tr.gaps[0].end_ms, 300.0);
}

TEST(DetectFixations, EmptyAndSingleSampleTraces) {
  EXPECT_TRUE(detect_fixations(std::vector<GazeSample>{}).fixations.empty());
  EXPECT_TRUE(detect_fixations(std::vector<GazeSample>{at(0, 1, 1)}).fixations.empty());
}

TEST(DetectFixations, MatchesBruteForceOracleAndPredicates) {
  std::mt19937_64 rng(42);
  DetectorConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    auto s = oracle::random_trace(rng);
    auto tr = detect_fixations(s, cfg);
    auto expected = oracle::brute_force_idt(s, cfg.max_dispersion_px, cfg.min_duration_ms, cfg.max_sample_gap_ms);
    ASSERT_EQ(tr.fixations.size(), expected.size()) << "trial " << trial;
    for (std::size_t k = 0; k < expected.size(); ++k) {
      const auto& f = tr.fixations[k];
      EXPECT_EQ(f.first_sample, expected[k].first);
      EXPECT_EQ(f.last_sample, expected[k].last);
      EXPECT_GE(f.duration_ms(), cfg.min_duration_ms);
      for (std::size_t i = f.first_sample; i <= f.last_sample; ++i)
        EXPECT_LE(std::hypot(s[i].x - f.cx, s[i].y - f.cy), cfg.max_dispersion_px + 1e-9);
    }
  }
}

TEST(DetectFixations, EventsPartitionTheTraceSpan) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = oracle::random_trace(rng);
    auto tr = detect_fixations(s);
    double total = 0.0;
    for (const auto& f : tr.fixations) total += f.duration_ms();
    for (const auto& c : tr.saccades) total += c.duration_ms();
    for (const auto& g : tr.gaps) total += g.end_ms - g.start_ms;
    EXPECT_NEAR(total, s.back().t - s.front().t, 1e-6);
  }
}

TEST(StandardizePupil, MatchesTwoPassZScores) {
  auto s = dwell(0, 100, 100, 6);
  for (auto& x : s) x.pupil = 2.0;
  auto b = dwell(100, 400, 100, 6);
  for (auto& x : b) x.pupil = 4.0;
  auto c = dwell(200, 700, 100, 6);
  for (auto& x : c) x.pupil = 6.0;
  s.insert(s.end(), b.begin(), b.end());
  s.insert(s.end(), c.begin(), c.end());
  auto tr = standardize_pupil(detect_fixations(s));
  ASSERT_EQ(tr.fixations.size(), 3u);
  // mean 4, population sd sqrt(8/3)
  double sd = std::sqrt(8.0 / 3.0);
  EXPECT_NEAR(*tr.fixations[0].mean_pupil, -2.0 / sd, 1e-12);
  EXPECT_NEAR(*tr.fixations[1].mean_pupil, 0.0, 1e-12);
  EXPECT_NEAR(*tr.fixations[2].mean_pupil, 2.0 / sd, 1e-12);
  EXPECT_TRUE(tr.pupil_standardized);
}

TEST(StandardizePupil, ZeroVarianceAndMissingPupil) {
  auto s = dwell(0, 100, 100, 8);
  auto tr = standardize_pupil(detect_fixations(s));
  EXPECT_DOUBLE_EQ(*tr.fixations[0].mean_pupil, 0.0);
  for (auto& x : s) x.pupil.reset();
  EXPECT_THROW(standardize_pupil(detect_fixations(s)), std::invalid_argument);
}

TEST(GazeJsonl, RoundTripsNullablePupil) {
  std::vector<GazeSample> s{at(0, 1.5, 2.5, 3.1), at(16.5, 4, 5), at(33, 0, 0, {}, false)};
  std::istringstream in(gaze_to_jsonl(s));
  auto back = read_gaze_jsonl(in);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0], s[0]);
  EXPECT_FALSE(back[1].pupil.has_value());
  EXPECT_FALSE(back[2].valid);
}

TEST(GazeJsonl, ReportsLineNumberOfBadRecord) {
  std::istringstream in("{\"t\":0,\"x\":1,\"y\":1,\"pupil\":null,\"valid\":true}\n{\"t\":1,\"x\":\"a\"}\n");
  try {
    read_gaze_jsonl(in);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}
