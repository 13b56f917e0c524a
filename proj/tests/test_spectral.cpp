#include <gtest/gtest.h>

#include <numeric>

#include "oracles.hpp"

using namespace gauss_extrema;

namespace {

SymMatrix from(const Matrix& a) { return SymMatrix::from_upper(a); }

double eigen_sum(const Spectrum& s) { return std::accumulate(s.eigenvalues.begin(), s.eigenvalues.end(), 0.0); }

}  // namespace

TEST(SymmEigen, Examples) {
  EXPECT_EQ(symm_eigen(from(Matrix::from_rows({{3, 0}, {0, -5}}))).eigenvalues, (std::vector<double>{-5, 3}));
  const auto s = symm_eigen(from(Matrix::from_rows({{0, 1}, {1, 0}})));
  EXPECT_NEAR(s.eigenvalues[0], -1.0, 1e-15);
  EXPECT_NEAR(s.eigenvalues[1], 1.0, 1e-15);
}

TEST(SymmEigen, TraceIdentity) {
  RngStream st(1, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = from(oracle::random_symmetric(8, st));
    EXPECT_NEAR(eigen_sum(symm_eigen(a)), a.trace(), 1e-9);
  }
}

TEST(SymmEigen, SideLimit) { EXPECT_ERROR_CODE(symm_eigen(SymMatrix(65)), DimensionTooLarge); }

TEST(SpectralRadius, Examples) {
  EXPECT_EQ(spectral_radius(from(Matrix::from_rows({{3, 0}, {0, -5}}))), 5.0);
  EXPECT_EQ(spectral_radius(SymMatrix(4)), 0.0);
}

TEST(SpectralRadius, PowerIterationOracle) {
  RngStream st(2, 0);
  for (std::size_t m : {2, 4, 8}) {
    for (int rep = 0; rep < 30; ++rep) {
      const auto a = oracle::random_symmetric(m, st);
      const double r = spectral_radius(from(a));
      EXPECT_NEAR(r / oracle::power_operator_norm(a), 1.0, 1e-7) << m;
    }
  }
}

TEST(PackedSpectrum, ClosedFormMatchesJacobi) {
  RngStream st(3, 0);
  for (std::size_t m : {1, 2, 3}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto a = from(oracle::random_symmetric(m, st));
      Vector out(m);
      packed_spectrum(m, a.packed(), out);
      const auto ref = symm_eigen(a).eigenvalues;
      for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(out[i], ref[i], 1e-12);
    }
  }
}

TEST(Hausdorff, Examples) {
  EXPECT_EQ(hausdorff(std::vector<double>{1, 2}, std::vector<double>{1, 2}), 0.0);
  EXPECT_EQ(hausdorff(std::vector<double>{0}, std::vector<double>{3}), 3.0);
  EXPECT_EQ(hausdorff(std::vector<double>{0, 1}, std::vector<double>{0.5}), 0.5);
  EXPECT_ERROR_CODE(hausdorff(std::vector<double>{}, std::vector<double>{1}), EmptySet);
}

TEST(Hausdorff, AgreesWithBruteForceAndAxioms) {
  RngStream st(4, 0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> a(1 + rep % 5), b(1 + rep % 3), c(2);
    for (double& v : a) v = st.next_normal();
    for (double& v : b) v = st.next_normal();
    for (double& v : c) v = st.next_normal();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::sort(c.begin(), c.end());
    const double ab = hausdorff(a, b);
    EXPECT_DOUBLE_EQ(ab, oracle::hausdorff_brute(a, b));
    EXPECT_EQ(ab, hausdorff(b, a));
    EXPECT_EQ(hausdorff(a, a), 0.0);
    EXPECT_LE(ab, hausdorff(a, c) + hausdorff(c, b) + 1e-15);
  }
}

TEST(Hausdorff, LipschitzAndWeyl) {
  RngStream st(5, 0);
  for (std::size_t m : {2, 3, 5}) {
    for (int rep = 0; rep < 500; ++rep) {
      const auto a = from(oracle::random_symmetric(m, st));
      const auto b = from(oracle::random_symmetric(m, st));
      const double d = hausdorff(symm_eigen(a), symm_eigen(b));
      const double q = spectral_radius(a - b);
      EXPECT_LE(d, 2.0 * q);
      EXPECT_LE(d, q + 1e-9);
    }
  }
}

TEST(SampleSym, SymmetryAndScalar) {
  auto s = derive_stream(6, 0);
  const auto a = sample_sym_gaussian(4, GaussianMeasure::standard(10), s);
  const auto full = a.to_matrix();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(full(i, j), full(j, i));
  const auto one = sample_sym_gaussian(1, GaussianMeasure::standard(1), s);
  EXPECT_EQ(spectral_radius(one), std::abs(one(0, 0)));
  EXPECT_ERROR_CODE(sample_sym_gaussian(3, GaussianMeasure::standard(5), s), DimensionMismatch);
}

TEST(SampleSym, OffDiagonalVariance) {
  const auto g = GaussianMeasure::standard(3);
  std::vector<double> sq;
  for (std::uint64_t t = 0; t < 100000; ++t) {
    auto s = derive_stream(7, t);
    const auto a = sample_sym_gaussian(2, g, s);
    sq.push_back(a(0, 1) * a(0, 1));
  }
  EXPECT_LE(std::abs(mean(sq) - 1.0), 3.0 * standard_error(sq));
}

TEST(ClusterSet, ScalarInterval) {
  const auto cloud = cluster_set_K(GaussianMeasure::standard(1), 1, 128);
  EXPECT_NEAR(cloud.distance(std::vector<double>{0.5}), 0.0, 1e-6);
  EXPECT_NEAR(cloud.distance(std::vector<double>{1.5}), 0.5, 1e-6);
  EXPECT_NEAR(cloud.distance(std::vector<double>{-1.25}), 0.25, 1e-6);
}

TEST(ClusterSet, DiagonalEnsembleSelfMembership) {
  const GaussianMeasure g(Matrix::diagonal(std::vector<double>{1.0, 1e-2, 1.0}));
  const auto cloud = cluster_set_K(g, 2, 4096);
  EXPECT_LE(cloud.stability, 1e-2);
  for (std::size_t p = 0; p < cloud.size(); p += 997) EXPECT_EQ(cloud.distance(cloud.index.point(p)), 0.0);
}

TEST(ClusterSet, LipschitzOnSampledK) {
  // Pairs of points of K: spectra within twice the operator-norm distance.
  const GaussianMeasure g(Matrix::from_rows({{1, 0.2, 0}, {0.2, 0.5, 0.1}, {0, 0.1, 1}}));
  const SphereSequence seq(3, 1);
  std::vector<Vector> pts;
  Vector u(3), x(3);
  for (std::size_t i = 0; i < 200; ++i) {
    seq.point(i, u);
    const double r = static_cast<double>(i % 7) / 6.0;
    for (double& v : u) v *= r;
    lower_matvec(g.factor(), u, x);
    pts.push_back(x);
  }
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      Vector si(2), sj(2), diff(3);
      packed_spectrum(2, pts[i], si);
      packed_spectrum(2, pts[j], sj);
      for (std::size_t k = 0; k < 3; ++k) diff[k] = pts[i][k] - pts[j][k];
      EXPECT_LE(hausdorff(si, sj), 2.0 * packed_spectral_radius(2, diff) + 1e-12);
    }
}

TEST(ClusterSet, Limits) {
  EXPECT_ERROR_CODE(cluster_set_K(GaussianMeasure::standard(45), 9, 100), DimensionTooLarge);
  EXPECT_ERROR_CODE(cluster_set_K(GaussianMeasure::standard(4), 2, 100), DimensionMismatch);
}

TEST(SpectralLaw, ScalarReducesToIidMaxima) {
  // Side 1 with N(0,1): diagnostic (i) is the running max of |a_k|, the same
  // numbers iid_maxima produces from the same stream.
  SpectralOptions opt;
  opt.cloud_resolution = 128;
  const auto g = GaussianMeasure::standard(1);
  const auto setup = SpectralSetup::make(g, 1, opt);
  const std::vector<std::uint64_t> cps = {10, 100, 1000};
  for (std::uint64_t t = 0; t < 5; ++t) {
    auto s1 = derive_stream(8, t), s2 = derive_stream(8, t);
    const auto spec = spectral_trial(setup, cps, s1);
    const auto iid = iid_maxima(g, NormSpec::linf(1), 1.0, {}, cps, s2);
    EXPECT_EQ(spec.radius_trace, iid.norm);
  }
}

TEST(SpectralLaw, LipschitzBoundOnEveryTrial) {
  SpectralOptions opt;
  opt.cloud_resolution = 2048;
  const auto setup = SpectralSetup::make(GaussianMeasure::standard(3), 2, opt);
  for (std::uint64_t t = 0; t < 10; ++t) {
    auto s = derive_stream(9, t);
    const auto r = spectral_trial(setup, std::vector<std::uint64_t>{100, 1000}, s);
    EXPECT_EQ(r.lipschitz_violations, 0u);
    for (const auto& row : r.rows) EXPECT_LE(row.cluster_distance, 2.0 * row.k_distance + setup.cloud.slack());
  }
}

TEST(SpectralLaw, ZeroTrials) {
  SpectralOptions opt;
  opt.cloud_resolution = 128;
  EXPECT_ERROR_CODE(spectral_strong_law(GaussianMeasure::standard(1), 1, std::vector<std::uint64_t>{10}, 0, 1, opt),
                    TooFewTrials);
}
