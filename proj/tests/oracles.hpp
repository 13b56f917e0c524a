#pragma once

// Independent reference computations used by the tests. None of these call
// into the library's numerical routines beyond plain containers and RNG.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "gauss_extrema.hpp"

namespace oracle {

using gauss_extrema::Matrix;
using gauss_extrema::RngStream;

// A Aᵀ + eps I with standard normal A: SPD with probability one.
inline Matrix random_spd(std::size_t d, RngStream& s, double eps = 0.1) {
  Matrix a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) = s.next_normal();
  Matrix c(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < d; ++k) v += a(i, k) * a(j, k);
      c(i, j) = v + (i == j ? eps : 0.0);
    }
  return c;
}

inline Matrix random_symmetric(std::size_t m, RngStream& s) {
  Matrix a(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) a(i, j) = a(j, i) = s.next_normal();
  return a;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
  return c;
}

// Operator norm of a symmetric A via powers of B = A². Repeated squaring
// with Frobenius rescaling drives B towards a multiple of the projector on
// the dominant eigenspace of A², and the Rayleigh quotient of a column of it
// gives λmax(A²) = ‖A‖².
inline double power_operator_norm(const Matrix& a, int steps = 200) {
  const Matrix a2 = multiply(a, a);
  Matrix b = a2;
  for (int it = 0; it < steps; ++it) {
    b = multiply(b, b);
    double f = 0.0;
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) f += b(i, j) * b(i, j);
    f = std::sqrt(f);
    if (f == 0.0) return 0.0;
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) /= f;
  }
  std::size_t best = 0;
  double best_norm = -1.0;
  for (std::size_t j = 0; j < b.cols(); ++j) {
    double n = 0.0;
    for (std::size_t i = 0; i < b.rows(); ++i) n += b(i, j) * b(i, j);
    if (n > best_norm) best_norm = n, best = j;
  }
  std::vector<double> u(b.rows());
  for (std::size_t i = 0; i < b.rows(); ++i) u[i] = b(i, best) / std::sqrt(best_norm);
  double rq = 0.0;
  for (std::size_t i = 0; i < a2.rows(); ++i)
    for (std::size_t j = 0; j < a2.cols(); ++j) rq += u[i] * a2(i, j) * u[j];
  return std::sqrt(std::max(rq, 0.0));
}

// Both directed distances by brute force.
inline double hausdorff_brute(std::span<const double> a, std::span<const double> b) {
  const auto directed = [](std::span<const double> x, std::span<const double> y) {
    double worst = 0.0;
    for (double u : x) {
      double best = std::numeric_limits<double>::infinity();
      for (double v : y) best = std::min(best, std::abs(u - v));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

// Solves Φ(x)^n = 1/2 by bisection on n·log Φ(x) + log 2.
inline double median_of_max_bisection(std::uint64_t n) {
  const auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  double lo = -10.0, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = static_cast<double>(n) * std::log(phi(mid)) + std::log(2.0);
    (g < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// max over the unit circle of q(L u), L the Cholesky factor, by dense sweep.
template <class Norm>
double dense_circle_gamma(const Matrix& sigma, Norm q, int points = 200000) {
  const double l11 = std::sqrt(sigma(0, 0));
  const double l21 = sigma(1, 0) / l11;
  const double l22 = std::sqrt(sigma(1, 1) - l21 * l21);
  double best = 0.0;
  for (int i = 0; i < points; ++i) {
    const double t = 2.0 * M_PI * i / points;
    const double u0 = std::cos(t), u1 = std::sin(t);
    const double x[2] = {l11 * u0, l21 * u0 + l22 * u1};
    best = std::max(best, q(x[0], x[1]));
  }
  return best;
}

inline double sample_covariance(std::span<const double> x, std::span<const double> y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
  return s / (x.size() - 1);
}

}  // namespace oracle

#define EXPECT_ERROR_CODE(stmt, expected)                                    \
  do {                                                                       \
    bool thrown_ = false;                                                    \
    try {                                                                    \
      stmt;                                                                  \
    } catch (const gauss_extrema::Error& e_) {                               \
      thrown_ = true;                                                        \
      EXPECT_EQ(e_.code(), gauss_extrema::ErrorCode::expected) << e_.what(); \
    }                                                                        \
    EXPECT_TRUE(thrown_) << "expected " #expected;                           \
  } while (0)
