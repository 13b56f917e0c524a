#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "gauss_extrema/error.hpp"

namespace gauss_extrema {

// Truncated logarithm max(ln x, 1).
inline double big_l(double x) {
  require(x > 0.0, ErrorCode::NonPositiveInput, "big_l needs x > 0");
  return std::max(std::log(x), 1.0);
}

// L(L(x)); always at least 1 because big_l(.) >= 1 and big_l(1) = 1.
inline double big_ll(double x) { return big_l(big_l(x)); }

inline double sqrt_2l(double x) { return std::sqrt(2.0 * big_l(x)); }
inline double sqrt_2ll(double x) { return std::sqrt(2.0 * big_ll(x)); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Upper tail 1 - Phi(x) without cancellation.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

namespace detail {

// Acklam's rational approximation for the lower half, p in (0, 0.5].
inline double acklam_lower(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  if (p < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

// Lower-tail quantile: x with Phi(x) = p. Two Halley steps on the erfc-based
// CDF take Acklam's 1e-9 start to full double precision.
inline double normal_quantile_lower(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  if (p > 0.5) return -normal_quantile_lower(1.0 - p);
  double x = detail::acklam_lower(p);
  for (int i = 0; i < 2; ++i) {
    const double e = normal_cdf(x) - p;
    const double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

// x with 1 - Phi(x) = q, accurate for tiny q.
inline double normal_quantile_upper(double q) { return -normal_quantile_lower(q); }

inline double normal_quantile(double p) {
  if (p > 0.5) return normal_quantile_upper(1.0 - p);
  return normal_quantile_lower(p);
}

inline double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

inline double gumbel_quantile(double p) { return -std::log(-std::log(p)); }

}  // namespace gauss_extrema
