#include "support.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace pclag;
using namespace pclag::test;

TEST(FitRate, ExactPowerLaws) {
  std::map<long, double> one, two;
  for (long k = 1; k <= 5000; ++k) one[k] = 1.0 / k, two[k] = 1.0 / (double(k) * k);
  const RateFit f1 = fit_rate(one), f2 = fit_rate(two);
  EXPECT_NEAR(f1.slope, -1.0, 1e-6);
  EXPECT_NEAR(f2.slope, -2.0, 1e-6);
  EXPECT_NEAR(f1.r_squared, 1.0, 1e-12);
  EXPECT_EQ(f1.k_lo, 1000);
  EXPECT_EQ(f1.k_hi, 5000);
}

TEST(FitRate, NoisySeries) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  std::map<long, double> s;
  for (long k = 1; k <= 5000; ++k) s[k] = 3.0 / k + 1e-9 * nd(rng);
  const double slope = fit_rate(s).slope;
  EXPECT_GE(slope, -1.05);
  EXPECT_LE(slope, -0.95);
}

TEST(FitRate, WindowRespectsMinimumK) {
  std::map<long, double> s;
  for (long k = 1; k <= 100; ++k) s[k] = 1.0 / k;
  const RateFit f = fit_rate(s);
  EXPECT_EQ(f.k_lo, 50);
  EXPECT_EQ(f.points, 51);
}

TEST(FitRate, ClipsNonPositiveValues) {
  std::map<long, double> s;
  for (long k = 1; k <= 1000; ++k) s[k] = k % 100 == 0 ? 0.0 : 1.0 / k;
  // window is k in [200, 1000]: zeros at 200, 300, ..., 1000
  EXPECT_EQ(fit_rate(s).clipped, 9);
}

TEST(FitRate, TooFewPointsIsInsufficientData) {
  std::map<long, double> s;
  for (long k = 1; k <= 60; ++k) s[k] = 1.0 / k;
  EXPECT_THROW(fit_rate(s), InsufficientData);
  EXPECT_THROW(fit_rate(std::map<long, double>{}), InsufficientData);
}

TEST(MetricSeries, KeysAreIterationCounts) {
  std::vector<MetricsRow> rows(3);
  for (long k = 0; k < 3; ++k) rows[size_t(k)].k = k, rows[size_t(k)].feasibility = 10.0 * k;
  const auto s = metric_series(rows, [](const MetricsRow& r) { return r.feasibility; });
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].first, 1);
  EXPECT_EQ(s[2].second, 20.0);
}
