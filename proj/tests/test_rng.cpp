#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"

using namespace gauss_extrema;

// Known-answer vectors produced by numpy's Philox4x64-10 bit generator.
TEST(Philox, KnownAnswerZeroKey) {
  const auto out = philox4x64_10({1, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x02f4ba6408e4d89bULL);
  EXPECT_EQ(out[1], 0x3dd62b0b9ca8c5b2ULL);
  EXPECT_EQ(out[2], 0x1c8667a55d902e79ULL);
  EXPECT_EQ(out[3], 0x907d7a052fd5b4dcULL);
}

TEST(Philox, KnownAnswerNonzeroKey) {
  const auto out = philox4x64_10({6, 7, 0, 0}, {0x1234, 0xabcd});
  EXPECT_EQ(out[0], 0xa037a6b41542b0edULL);
  EXPECT_EQ(out[1], 0xfe9990cb36382843ULL);
  EXPECT_EQ(out[2], 0x85e4d1708106a3e9ULL);
  EXPECT_EQ(out[3], 0xee2aea81c220c427ULL);
}

TEST(DeriveStream, SameSeedAndIndexRepeat) {
  auto a = derive_stream(99, 5);
  auto b = derive_stream(99, 5);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(DeriveStream, ZeroSeedIsValid) {
  auto s = derive_stream(0, 0);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 64; ++i) seen.insert(s.next_u64());
  EXPECT_EQ(seen.size(), 64u);
}

TEST(DeriveStream, NoCollisionsAcrossIndices) {
  std::set<std::array<std::uint64_t, 4>> firsts;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    auto s = derive_stream(12345, i);
    firsts.insert({s.next_u64(), s.next_u64(), s.next_u64(), s.next_u64()});
  }
  EXPECT_EQ(firsts.size(), 10000u);
  auto s0 = derive_stream(7, 0), s1 = derive_stream(7, 1);
  EXPECT_NE(s0.next_u64(), s1.next_u64());
}

TEST(RngStream, TagsSeparateStreams) {
  RngStream a(1, 2, 0), b(1, 2, 1);
  EXPECT_NE(a.next_u64(), b.next_u64());
  auto c = a.substream(0), d = a.substream(1);
  EXPECT_NE(c.next_u64(), d.next_u64());
}

TEST(RngStream, UniformRanges) {
  RngStream s(3, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.next_uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = s.next_uniform_open0();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(RngStream, NormalMoments) {
  RngStream s(11, 0);
  const int n = 200000;
  double m1 = 0.0, m2 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.next_normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  EXPECT_NEAR(m1, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m4, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(RngStream, NormalTailFrequency) {
  RngStream s(12, 0);
  const int n = 400000;
  int beyond = 0;
  for (int i = 0; i < n; ++i) beyond += std::abs(s.next_normal()) > 1.959963984540054;
  const double p = static_cast<double>(beyond) / n;
  EXPECT_NEAR(p, 0.05, 4.0 * std::sqrt(0.05 * 0.95 / n));
}
