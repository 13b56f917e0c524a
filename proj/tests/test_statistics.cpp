#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace gauss_extrema;

TEST(Quantile, Type7) {
  const std::vector<double> v = {4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(median(v), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.1), 1.3);
  EXPECT_ERROR_CODE(median(std::vector<double>{}), EmptyInput);
}

TEST(BootstrapSe, MatchesAsymptoticMedianSe) {
  // SE of the median of n normals is about sqrt(pi / 2n).
  auto s = derive_stream(1, 0);
  std::vector<double> x(2000);
  for (double& v : x) v = s.next_normal();
  const double se = bootstrap_median_se(x, RngStream(1, 0, 99));
  EXPECT_NEAR(se / std::sqrt(M_PI / (2.0 * 2000)), 1.0, 0.25);
}

TEST(BootstrapSe, Deterministic) {
  const std::vector<double> x = {1, 5, 2, 8, 3, 9, 4};
  EXPECT_EQ(bootstrap_median_se(x, RngStream(3, 1)), bootstrap_median_se(x, RngStream(3, 1)));
}

TEST(Ks, SingleSampleAtMedian) {
  const std::vector<double> x = {0.0};
  EXPECT_NEAR(ks_statistic(x, normal_cdf), 0.5, 1e-15);
}

TEST(Ks, MidpointQuantiles) {
  const int n = 50;
  std::vector<double> x;
  for (int i = 1; i <= n; ++i) x.push_back(normal_quantile((i - 0.5) / n));
  EXPECT_NEAR(ks_statistic(x, normal_cdf), 0.5 / n, 1e-12);
}

TEST(Ks, GumbelInverseCdfSamples) {
  const int n = 2000;
  std::vector<double> x;
  for (int i = 1; i <= n; ++i) x.push_back(gumbel_quantile((i - 0.5) / n));
  EXPECT_LT(ks_statistic(x, gumbel_cdf), 0.001);
}

TEST(Ks, InvariantUnderIncreasingAffineMaps) {
  auto s = derive_stream(2, 0);
  std::vector<double> x(300);
  for (double& v : x) v = s.next_normal();
  std::sort(x.begin(), x.end());
  const double base = ks_statistic(x, normal_cdf);
  for (auto [a, b] : {std::pair{2.0, 1.0}, std::pair{0.1, -3.0}}) {
    std::vector<double> y;
    for (double v : x) y.push_back(a * v + b);
    const double moved = ks_statistic(y, [a = a, b = b](double t) { return normal_cdf((t - b) / a); });
    EXPECT_NEAR(moved, base, 1e-12);
  }
  EXPECT_ERROR_CODE(ks_statistic(std::vector<double>{}, normal_cdf), EmptyInput);
}

TEST(Summary, Fields) {
  std::vector<double> x;
  for (int i = 0; i < 101; ++i) x.push_back(i);
  const auto r = summarize(x, RngStream(1, 1));
  EXPECT_EQ(r.count, 101u);
  EXPECT_DOUBLE_EQ(r.median, 50.0);
  EXPECT_DOUBLE_EQ(r.q10, 10.0);
  EXPECT_DOUBLE_EQ(r.q90, 90.0);
  EXPECT_GT(r.se, 0.0);
}
