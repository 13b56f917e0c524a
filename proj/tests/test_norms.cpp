#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace gauss_extrema;

TEST(NormSpec, Values) {
  const Vector x = {3.0, -4.0};
  EXPECT_EQ(NormSpec::l1(2)(x), 7.0);
  EXPECT_EQ(NormSpec::l2(2)(x), 5.0);
  EXPECT_EQ(NormSpec::linf(2)(x), 4.0);
  EXPECT_EQ(NormSpec::sup_grid(2)(x), 4.0);
  // diag(3,-5) packed as (a11, a12, a22).
  EXPECT_EQ(NormSpec::operator_sym(2)(Vector{3.0, 0.0, -5.0}), 5.0);
}

TEST(NormSpec, OperatorSymDimension) {
  for (std::size_t m = 1; m <= 8; ++m) EXPECT_EQ(NormSpec::operator_sym(m).dim(), m * (m + 1) / 2);
  EXPECT_ERROR_CODE(NormSpec::make(NormKind::OperatorSym, 4), DimensionMismatch);
  EXPECT_EQ(NormSpec::make(NormKind::OperatorSym, 6).parameter(), 3u);
}

TEST(NormSpec, ZeroAndHomogeneity) {
  RngStream s(4, 0);
  for (auto q : {NormSpec::l1(6), NormSpec::l2(6), NormSpec::linf(6), NormSpec::operator_sym(3)}) {
    EXPECT_EQ(q(Vector(6, 0.0)), 0.0);
    Vector x(6), y(6);
    for (double& v : x) v = s.next_normal();
    for (double c : {-2.0, 0.5, 4.0}) {
      for (std::size_t i = 0; i < 6; ++i) y[i] = c * x[i];
      EXPECT_DOUBLE_EQ(q(y), std::abs(c) * q(x));
    }
  }
}

TEST(NormSpec, DualNormIsSupremumOverUnitBall) {
  // sup{f.x : q(x) <= 1} approached by normalized random directions; never
  // exceeded.
  RngStream s(5, 0);
  for (auto q : {NormSpec::l1(3), NormSpec::l2(3), NormSpec::linf(3), NormSpec::operator_sym(2)}) {
    Vector f(3);
    for (double& v : f) v = s.next_normal();
    const double dual = q.dual(f);
    double best = 0.0;
    Vector x(3);
    for (int i = 0; i < 200000; ++i) {
      for (double& v : x) v = s.next_normal();
      const double n = q(x);
      best = std::max(best, dot(f, x) / n);
    }
    EXPECT_LE(best, dual * (1 + 1e-12));
    EXPECT_GT(best, dual * 0.98);
  }
}

TEST(NormSpec, ScaledDivisor) {
  const auto q = NormSpec::l2(2).scaled(2.0);
  EXPECT_EQ(q(Vector{3.0, 4.0}), 2.5);
  EXPECT_EQ(q.dual(Vector{3.0, 4.0}), 10.0);
  EXPECT_ERROR_CODE(NormSpec::l2(2).scaled(0.0), NonPositiveInput);
}

TEST(NormSpec, DimensionChecked) { EXPECT_ERROR_CODE(NormSpec::l2(3)(Vector{1.0, 2.0}), DimensionMismatch); }

TEST(NormSpec, ParseNames) {
  for (auto k : {NormKind::L1, NormKind::L2, NormKind::Linf, NormKind::SupGrid, NormKind::OperatorSym})
    EXPECT_EQ(parse_norm_kind(to_string(k)), k);
  EXPECT_ERROR_CODE(parse_norm_kind("l3"), ConfigError);
}

TEST(Packed, IndexAndUnpack) {
  const Vector p = {1, 2, 3, 4, 5, 6};  // side 3
  const auto a = unpack_symmetric(3, p);
  EXPECT_EQ(a(0, 0), 1);
  EXPECT_EQ(a(0, 2), 3);
  EXPECT_EQ(a(2, 0), 3);
  EXPECT_EQ(a(1, 1), 4);
  EXPECT_EQ(a(2, 2), 6);
  EXPECT_EQ(side_from_packed(6), 3u);
  EXPECT_EQ(side_from_packed(7), 0u);
}

TEST(Packed, RankOneFunctionalPairing) {
  // f(x) for f = rank_one_functional(u) equals uᵀ X u.
  RngStream s(6, 0);
  Vector u(3), x(6);
  for (double& v : u) v = s.next_normal();
  for (double& v : x) v = s.next_normal();
  const auto g = rank_one_functional(u);
  const auto a = unpack_symmetric(3, x);
  double quad = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) quad += u[i] * a(i, j) * u[j];
  EXPECT_NEAR(dot(g, x), quad, 1e-12);
}
