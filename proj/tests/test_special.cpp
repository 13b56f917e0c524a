#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"

using namespace gauss_extrema;

TEST(TruncatedLog, Values) {
  EXPECT_EQ(big_l(1.0), 1.0);
  EXPECT_EQ(big_l(0.5), 1.0);
  EXPECT_NEAR(big_l(std::exp(2.0)), 2.0, 1e-15);
  EXPECT_NEAR(big_l(3.0), std::log(3.0), 1e-15);
  EXPECT_NEAR(big_l(3.0), 1.0986, 1e-4);
  EXPECT_EQ(big_ll(10.0), 1.0);
  EXPECT_NEAR(big_ll(1e6), std::log(std::log(1e6)), 1e-15);
  EXPECT_NEAR(sqrt_2l(100.0), std::sqrt(2.0 * std::log(100.0)), 1e-15);
}

TEST(Normal, CdfAndQuantileRoundTrip) {
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-16);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-14);
  EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-11);
  for (double p : {1e-300, 1e-20, 1e-5, 0.01, 0.3, 0.5, 0.77, 0.999}) {
    const double x = normal_quantile(p);
    EXPECT_NEAR(normal_cdf(x) / p, 1.0, 1e-12) << p;
  }
  // Upper tail without cancellation.
  EXPECT_NEAR(normal_sf(normal_quantile_upper(1e-12)) / 1e-12, 1.0, 1e-12);
}

TEST(Gumbel, Cdf) {
  EXPECT_NEAR(gumbel_cdf(0.0), std::exp(-1.0), 1e-16);
  EXPECT_NEAR(gumbel_cdf(0.0), 0.3679, 1e-4);
  EXPECT_NEAR(gumbel_cdf(40.0), 1.0, 1e-15);
  EXPECT_LT(gumbel_cdf(-40.0), 1e-15);
  for (double p : {0.01, 0.5, 0.9}) EXPECT_NEAR(gumbel_cdf(gumbel_quantile(p)), p, 1e-14);
}
