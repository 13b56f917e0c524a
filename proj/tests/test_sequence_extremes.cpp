#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace gauss_extrema;

TEST(PartialMaxima, SmallExample) {
  const std::vector<double> v = {0.5, 2.0, 1.0};
  const std::vector<std::uint64_t> cps = {3};
  const auto t = partial_maxima(v, cps);
  ASSERT_EQ(t.checkpoints.size(), 1u);
  EXPECT_EQ(t.checkpoints[0].max_value, 2.0);
  EXPECT_NEAR(t.checkpoints[0].centered, 0.5177, 1e-4);
  EXPECT_EQ(t.checkpoints[0].centered, 2.0 - std::sqrt(2.0 * std::log(3.0)));
}

TEST(PartialMaxima, AllZeros) {
  const std::vector<double> v(10, 0.0);
  const std::vector<std::uint64_t> cps = {10};
  EXPECT_EQ(partial_maxima(v, cps).checkpoints[0].centered, -std::sqrt(2.0 * std::log(10.0)));
}

TEST(PartialMaxima, CenteringIdentityAndMonotone) {
  auto s = derive_stream(1, 0);
  std::vector<double> v(5000);
  for (double& x : v) x = s.next_normal();
  const std::vector<std::uint64_t> cps = {1, 2, 10, 100, 1000, 5000};
  const auto t = partial_maxima(v, cps);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const auto& c = t.checkpoints[i];
    EXPECT_EQ(c.n, cps[i]);
    EXPECT_EQ(c.centered, c.max_value - sqrt_2l(static_cast<double>(c.n)));
    EXPECT_EQ(c.max_value, *std::max_element(v.begin(), v.begin() + cps[i]));
    if (i) EXPECT_GE(c.max_value, t.checkpoints[i - 1].max_value);
  }
}

TEST(PartialMaxima, BadCheckpoints) {
  const std::vector<double> v(10, 1.0);
  EXPECT_ERROR_CODE(partial_maxima(v, std::vector<std::uint64_t>{5, 5}), BadCheckpoints);
  EXPECT_ERROR_CODE(partial_maxima(v, std::vector<std::uint64_t>{0, 5}), BadCheckpoints);
  EXPECT_ERROR_CODE(partial_maxima(v, std::vector<std::uint64_t>{11}), BadCheckpoints);
  EXPECT_ERROR_CODE(partial_maxima(v, std::vector<std::uint64_t>{}), BadCheckpoints);
}

TEST(MedianOracle, Values) {
  EXPECT_EQ(median_oracle_iid(1), 0.0);
  // High-precision values computed with mpmath.
  EXPECT_NEAR(median_oracle_iid(100), 2.4620378381027015822, 1e-12);
  EXPECT_NEAR(median_oracle_iid(1000), 3.1975894953840151697, 1e-12);
  EXPECT_NEAR(median_oracle_iid(100000), 4.3460215498848056871, 1e-12);
  EXPECT_NEAR(median_oracle_iid(10000), oracle::median_of_max_bisection(10000), 1e-8);
  for (std::uint64_t n : {2, 7, 50, 333}) EXPECT_NEAR(median_oracle_iid(n), oracle::median_of_max_bisection(n), 1e-9);
}

TEST(MedianOracle, MonteCarloAtHundred) {
  std::vector<double> maxima;
  for (std::uint64_t t = 0; t < 2000; ++t) {
    auto s = derive_stream(77, t);
    double m = -1e300;
    for (int k = 0; k < 100; ++k) m = std::max(m, s.next_normal());
    maxima.push_back(m);
  }
  const auto row = summarize(maxima, RngStream(77, 0, 1));
  EXPECT_LE(std::abs(row.median - median_oracle_iid(100)), 3.0 * row.se);
}

TEST(Stationary, IidLagOneCorrelation) {
  const StationaryGenerator gen(CorrelationModel::iid(), 3);
  std::vector<double> a, b;
  for (std::uint64_t t = 0; t < 100000; ++t) {
    auto s = derive_stream(2, t);
    const auto x = gen.sample(s);
    a.push_back(x[0]);
    b.push_back(x[1]);
  }
  EXPECT_NEAR(oracle::sample_covariance(a, b), 0.0, 0.01);
}

TEST(Stationary, ExpHalfLagTwo) {
  const auto model = CorrelationModel::tabulated([](std::uint64_t k) { return std::exp(-0.5 * k); }, 100);
  const StationaryGenerator gen(model, 100, StationaryMethod::Dense);
  const int trials = 20000;
  std::vector<double> prod;
  for (int t = 0; t < trials; ++t) {
    auto s = derive_stream(3, t);
    const auto x = gen.sample(s);
    prod.push_back(x[40] * x[42]);
  }
  EXPECT_LE(std::abs(mean(prod) - std::exp(-1.0)), 3.0 * standard_error(prod));
}

TEST(Stationary, MethodsAgreeInLaw) {
  // AR(1) fast path, dense factor and block window all give lag-k
  // covariance rho^k.
  const double rho = std::exp(-0.5);
  const auto geo = CorrelationModel::geometric(rho);
  const auto tab = CorrelationModel::tabulated([rho](std::uint64_t k) { return std::pow(rho, k); }, 600);
  const StationaryGenerator ar(geo, 600), dense(tab, 600, StationaryMethod::Dense),
      block(tab, 600, StationaryMethod::BlockWindow, 64);
  EXPECT_EQ(ar.method(), StationaryMethod::Ar1);
  for (const auto* g : {&ar, &dense, &block}) {
    std::vector<double> p1, p0;
    for (int t = 0; t < 20000; ++t) {
      auto s = derive_stream(4, t);
      const auto x = g->sample(s);
      p0.push_back(x[500] * x[500]);
      p1.push_back(x[499] * x[500]);
    }
    EXPECT_LE(std::abs(mean(p0) - 1.0), 4.0 * standard_error(p0));
    EXPECT_LE(std::abs(mean(p1) - rho), 4.0 * standard_error(p1));
  }
}

TEST(Stationary, ConstantCorrelationClipsWithoutError) {
  const auto model = CorrelationModel::tabulated([](std::uint64_t) { return 1.0; }, 50);
  const StationaryGenerator gen(model, 50, StationaryMethod::Dense);
  EXPECT_GT(gen.clipped_pivots(), 0u);
  auto s = derive_stream(5, 0);
  const auto x = gen.sample(s);
  for (double v : x) EXPECT_NEAR(v, x[0], 1e-6);
}

TEST(Stationary, DenseCapEnforced) {
  EXPECT_ERROR_CODE(StationaryGenerator(CorrelationModel::iid(), kDenseToeplitzCap + 1, StationaryMethod::Dense),
                    SizeExceeded);
}

TEST(Conditions, Berman) {
  const auto exp_half = CorrelationModel::geometric(std::exp(-0.5));
  const auto b = berman_condition(exp_half, 100);
  EXPECT_NEAR(b.rows[19].second, 20.0 * std::exp(-10.0), 1e-15);
  EXPECT_NEAR(b.rows[19].second, 9.1e-4, 1e-5);
  EXPECT_TRUE(b.convergent);
  const auto inv_log =
      CorrelationModel::tabulated([](std::uint64_t k) { return 1.0 / std::log(k + 2.0); }, 1001);
  EXPECT_FALSE(berman_condition(inv_log, 1000).convergent);
  const auto iid = berman_condition(CorrelationModel::iid(), 50);
  for (const auto& r : iid.rows) EXPECT_EQ(r.second, 0.0);
  EXPECT_TRUE(iid.convergent);
}

TEST(Conditions, Log) {
  EXPECT_TRUE(log_condition(CorrelationModel::geometric(std::exp(-0.5)), 100).convergent);
  EXPECT_TRUE(
      log_condition(CorrelationModel::tabulated([](std::uint64_t k) { return 1.0 / std::sqrt(k); }, 100001), 100000)
          .convergent);
  const auto inv_log = CorrelationModel::tabulated([](std::uint64_t k) { return 1.0 / std::log(k + 1.0); }, 10001);
  const auto c = log_condition(inv_log, 10000);
  EXPECT_FALSE(c.convergent);
  EXPECT_NEAR(c.rows.back().second, 1.0, 1e-3);
}

TEST(Symmetrization, Examples) {
  const std::vector<double> a(100, 1.0), b(100, 2.0);
  EXPECT_EQ(symmetrization_gap(a, a).median, 0.0);
  EXPECT_EQ(symmetrization_gap(a, a).q90, 0.0);
  EXPECT_EQ(symmetrization_gap(a, b).median, 1.0);
  EXPECT_ERROR_CODE(symmetrization_gap(a, std::vector<double>(99, 1.0)), LengthMismatch);
}

TEST(Symmetrization, GapShrinksWithN) {
  const std::vector<std::uint64_t> cps = {100, 10000};
  std::vector<double> a100, b100, a1e4, b1e4;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    auto s = derive_stream(6, t);
    std::vector<double> v(10000);
    for (double& x : v) x = s.next_normal();
    const auto tr = partial_maxima(v, cps);
    (t < 500 ? a100 : b100).push_back(tr.checkpoints[0].max_value);
    (t < 500 ? a1e4 : b1e4).push_back(tr.checkpoints[1].max_value);
  }
  EXPECT_LT(symmetrization_gap(a1e4, b1e4).median, symmetrization_gap(a100, b100).median);
}

TEST(VaryingGamma, ScalingScheduleGammas) {
  const GaussianMeasure base(Matrix::from_rows({{2, 0.3}, {0.3, 1}}));
  const auto q = NormSpec::linf(2);
  std::vector<GaussianMeasure> ms;
  for (int k = 1; k <= 200; ++k) ms.push_back(base.scaled(1.0 + 1.0 / k));
  auto s = derive_stream(7, 0);
  const auto r = varying_gamma_maxima(ms, base, q, std::vector<std::uint64_t>{10, 200}, s);
  for (int k = 1; k <= 200; ++k) {
    EXPECT_NEAR(r.gammas[k - 1], std::sqrt(1.0 + 1.0 / k) * r.limit_gamma, 1e-9);
    EXPECT_NEAR(r.condition.rows[k - 1].second, (std::sqrt(1.0 + 1.0 / k) - 1.0) * std::sqrt(big_l(k)), 1e-9);
  }
  EXPECT_TRUE(r.condition.convergent);
}

TEST(VaryingGamma, ConstantScheduleMatchesPlain) {
  const auto base = GaussianMeasure::standard(2);
  std::vector<GaussianMeasure> ms(100, base);
  auto s = derive_stream(8, 0);
  const auto r = varying_gamma_maxima(ms, base, NormSpec::l2(2), std::vector<std::uint64_t>{10, 100}, s);
  EXPECT_EQ(r.tilde, r.plain);
}

TEST(VaryingGamma, SlowScheduleFlaggedViolating) {
  const auto base = GaussianMeasure::standard(1);
  std::vector<GaussianMeasure> ms;
  for (int k = 1; k <= 5000; ++k) ms.push_back(base.scaled(1.0 + 1.0 / std::sqrt(big_l(k))));
  auto s = derive_stream(9, 0);
  const auto r = varying_gamma_maxima(ms, base, NormSpec::l2(1), std::vector<std::uint64_t>{5000}, s);
  EXPECT_FALSE(r.condition.convergent);
  // sqrt(1 + x) - 1 ~ x/2 with x = 1/sqrt(L k): the condition tends to 1/2.
  EXPECT_NEAR(r.condition.rows.back().second, 0.5, 0.1);
}

TEST(VaryingGamma, LengthMismatch) {
  std::vector<GaussianMeasure> ms(5, GaussianMeasure::standard(1));
  auto s = derive_stream(1, 0);
  EXPECT_ERROR_CODE(varying_gamma_maxima(ms, GaussianMeasure::standard(1), NormSpec::l2(1),
                                         std::vector<std::uint64_t>{6}, s),
                    BadCheckpoints);
}

TEST(IidMaxima, SignedTraceIsStandardNormalMaximum) {
  // In any dimension f0(X)/Gamma ~ N(0, 1), so its running max has the iid
  // median law.
  const GaussianMeasure m(Matrix::from_rows({{1, 0.5, 0}, {0.5, 2, 0.3}, {0, 0.3, 1}}));
  const auto q = NormSpec::l1(3);
  const auto w = extremal_witness(m, q);
  std::vector<double> at100;
  for (std::uint64_t t = 0; t < 2000; ++t) {
    auto s = derive_stream(10, t);
    at100.push_back(iid_maxima(m, q, w.gamma, w.f0, std::vector<std::uint64_t>{100}, s)
                        .signed_max.checkpoints[0]
                        .max_value);
  }
  const auto row = summarize(at100, RngStream(10, 0, 1));
  EXPECT_LE(std::abs(row.median - median_oracle_iid(100)), 3.0 * row.se);
}

TEST(IidMaxima, SignedNeverExceedsNorm) {
  const GaussianMeasure m(Matrix::from_rows({{1, 0.5}, {0.5, 1}}));
  for (auto q : {NormSpec::l1(2), NormSpec::l2(2), NormSpec::linf(2)}) {
    const auto w = extremal_witness(m, q);
    auto s = derive_stream(11, 0);
    const auto r = iid_maxima(m, q, w.gamma, w.f0, std::vector<std::uint64_t>{10, 1000}, s);
    for (std::size_t i = 0; i < 2; ++i)
      EXPECT_LE(r.signed_max.checkpoints[i].max_value, r.norm.checkpoints[i].max_value + 1e-12);
  }
}
