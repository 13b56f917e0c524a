#pragma once

// Centered non-degenerate Gaussian measures on (R^d, q): sampling, the
// reproducing-kernel ellipsoid K = { L u : |u|_2 <= 1 }, and the two routes
// to Gamma = sup_{x in K} q(x) = sup_{q*(f) <= 1} sqrt(f^T Sigma f).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gauss_extrema/error.hpp"
#include "gauss_extrema/linalg.hpp"
#include "gauss_extrema/norms.hpp"
#include "gauss_extrema/packed.hpp"
#include "gauss_extrema/rng.hpp"
#include "gauss_extrema/sphere.hpp"

namespace gauss_extrema {

class GaussianMeasure {
 public:
  GaussianMeasure(Matrix covariance, std::string label = {})
      : covariance_(std::move(covariance)), factor_(cholesky_factor(covariance_)), label_(std::move(label)) {}

  static GaussianMeasure standard(std::size_t dim, std::string label = "standard") {
    return GaussianMeasure(Matrix::identity(dim), std::move(label));
  }

  std::size_t dim() const noexcept { return covariance_.rows(); }
  const Matrix& covariance() const noexcept { return covariance_; }
  const Matrix& factor() const noexcept { return factor_; }
  const std::string& label() const noexcept { return label_; }

  // L z with z standard normal drawn from the stream.
  void sample_into(RngStream& stream, std::span<double> out, std::span<double> scratch) const {
    const std::size_t d = dim();
    for (std::size_t i = 0; i < d; ++i) scratch[i] = stream.next_normal();
    lower_matvec(factor_, scratch.first(d), out);
  }

  Vector sample(RngStream& stream) const {
    Vector z(dim()), x(dim());
    sample_into(stream, x, z);
    return x;
  }

  GaussianMeasure scaled(double c) const {
    require(c > 0.0, ErrorCode::NonPositiveInput, "covariance scale must be positive");
    return GaussianMeasure(c * covariance_, label_);
  }

  // f^T Sigma g.
  double covariance_form(std::span<const double> f, std::span<const double> g) const {
    return dot(f, matvec(covariance_, g));
  }

 private:
  Matrix covariance_;
  Matrix factor_;
  std::string label_;
};

// Extremal pair: x0 in K with q(x0) = gamma, f0 with q*(f0) = 1 and
// f0(x0) = gamma.
struct DualWitness {
  Vector x0;
  Vector f0;
  double gamma = 0.0;
};

inline constexpr std::size_t kMaxL1EnumerationDim = 20;

struct DualSigmaOptions {
  std::size_t sweep_resolution = 4096;  // operator-sym only
  std::size_t refine_candidates = 6;
  std::uint64_t seed = kDefaultSphereSeed;
};

namespace detail {

struct DualOptimum {
  double sigma;  // w.r.t. the raw (undivided) norm
  Vector functional;
};

inline void check_compatible(const GaussianMeasure& m, const NormSpec& q) {
  require(m.dim() == q.dim(), ErrorCode::DimensionMismatch,
          "measure dimension " + std::to_string(m.dim()) + " vs norm dimension " + std::to_string(q.dim()));
}

inline DualOptimum dual_l2(const GaussianMeasure& m) {
  const auto eig = jacobi_eigen(m.covariance());
  const std::size_t d = m.dim();
  Vector f(d);
  for (std::size_t i = 0; i < d; ++i) f[i] = eig.vectors(i, d - 1);
  // Deterministic sign: first non-negligible entry positive.
  for (double v : f) {
    if (std::abs(v) > 1e-12) {
      if (v < 0.0)
        for (double& w : f) w = -w;
      break;
    }
  }
  const double lambda = m.covariance_form(f, f);
  return {std::sqrt(std::max(lambda, 0.0)), std::move(f)};
}

inline DualOptimum dual_coordinate(const GaussianMeasure& m) {
  const Matrix& s = m.covariance();
  std::size_t best = 0;
  for (std::size_t i = 1; i < m.dim(); ++i)
    if (s(i, i) > s(best, best)) best = i;
  Vector f(m.dim(), 0.0);
  f[best] = 1.0;
  return {std::sqrt(s(best, best)), std::move(f)};
}

// Exhaustive search over sign vectors with s_0 = +1 (s and -s agree), walked
// in Gray-code order so each step costs O(d). The winner is re-evaluated
// directly at the end.
inline DualOptimum dual_l1(const GaussianMeasure& m) {
  const std::size_t d = m.dim();
  require(d <= kMaxL1EnumerationDim, ErrorCode::DimensionTooLarge,
          "l1 dual enumeration is capped at d = 20, got " + std::to_string(d));
  const Matrix& s = m.covariance();
  Vector sign(d, 1.0);
  Vector sigma_s(d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) sigma_s[i] += s(i, j);
  double value = dot(sign, sigma_s);
  double best_value = value;
  std::uint64_t best_code = 0;
  const std::uint64_t count = std::uint64_t{1} << (d - 1);
  std::uint64_t gray = 0;
  for (std::uint64_t step = 1; step < count; ++step) {
    const std::size_t bit = static_cast<std::size_t>(__builtin_ctzll(step));
    const std::size_t j = bit + 1;  // coordinate 0 stays +1
    gray ^= std::uint64_t{1} << bit;
    const double sj = sign[j];
    value += -4.0 * sj * sigma_s[j] + 4.0 * s(j, j);
    for (std::size_t i = 0; i < d; ++i) sigma_s[i] -= 2.0 * sj * s(i, j);
    sign[j] = -sj;
    if (value > best_value) {
      best_value = value;
      best_code = gray;
    }
  }
  Vector f(d, 1.0);
  for (std::size_t bit = 0; bit + 1 < d; ++bit)
    if ((best_code >> bit) & 1U) f[bit + 1] = -1.0;
  const double exact = m.covariance_form(f, f);
  return {std::sqrt(std::max(exact, 0.0)), std::move(f)};
}

// phi(u) = Var(u^T A u) = g(u)^T Sigma g(u) for the rank-one functional g(u).
struct RankOneObjective {
  const GaussianMeasure& measure;
  std::size_t side;

  double value(std::span<const double> u) const {
    const Vector g = rank_one_functional(u);
    return measure.covariance_form(g, g);
  }

  // Returns W(u) u where W is the symmetric matrix carrying Sigma g(u);
  // the Euclidean gradient of phi is 4 W(u) u.
  Vector half_gradient(std::span<const double> u) const {
    const Vector g = rank_one_functional(u);
    const Vector w = matvec(measure.covariance(), g);
    Vector out(side, 0.0);
    for (std::size_t i = 0; i < side; ++i)
      for (std::size_t j = 0; j < side; ++j) out[i] += w[packed_index(side, i, j)] * u[j];
    return out;
  }
};

struct RefineResult {
  Vector u;
  double value;
  double last_move;
};

// Shifted symmetric higher-order power iteration on the sphere: the update
// u <- normalize(W(u) u + shift u) is monotone once the shift is large
// enough, so the shift doubles whenever a step fails to ascend.
inline RefineResult refine_rank_one(const RankOneObjective& obj, Vector u, int max_iter = 20000) {
  double value = obj.value(u);
  double shift = 0.0;
  double move = std::numeric_limits<double>::infinity();
  const double scale = std::max(obj.measure.covariance().frobenius(), 1e-300);
  for (int it = 0; it < max_iter && move > 1e-13; ++it) {
    const Vector h = obj.half_gradient(u);
    Vector next(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) next[i] = h[i] + shift * u[i];
    const double n = norm2(next);
    if (!(n > 0.0)) break;
    for (double& v : next) v /= n;
    const double next_value = obj.value(next);
    if (next_value < value - 1e-15 * std::abs(value)) {
      shift = shift == 0.0 ? scale : 2.0 * shift;
      continue;
    }
    Vector diff(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) diff[i] = next[i] - u[i];
    move = norm2(diff);
    u = std::move(next);
    value = next_value;
  }
  return {std::move(u), value, move};
}

inline DualOptimum dual_operator_sym(const GaussianMeasure& m, std::size_t side, const DualSigmaOptions& opt) {
  const RankOneObjective obj{m, side};
  if (side == 1) {
    const Vector u{1.0};
    return {std::sqrt(obj.value(u)), rank_one_functional(u)};
  }
  const SphereSequence seq(side, opt.seed);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(opt.sweep_resolution);
  Vector u(side);
  for (std::size_t i = 0; i < opt.sweep_resolution; ++i) {
    seq.point(i, u);
    scored.emplace_back(obj.value(u), i);
  }
  const std::size_t keep = std::min(opt.refine_candidates, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });

  bool any_converged = false;
  RefineResult best{{}, -1.0, 0.0};
  for (std::size_t c = 0; c < keep; ++c) {
    seq.point(scored[c].second, u);
    RefineResult r = refine_rank_one(obj, u);
    if (r.last_move > 1e-6) continue;
    any_converged = true;
    if (r.value > best.value) best = std::move(r);
  }
  if (!any_converged)
    throw Error(ErrorCode::ResolutionTooCoarse, "operator-sym dual refinement did not settle to 1e-6");
  // Canonical sign for u (the functional is even in u anyway).
  for (double v : best.u) {
    if (std::abs(v) > 1e-12) {
      if (v < 0.0)
        for (double& w : best.u) w = -w;
      break;
    }
  }
  return {std::sqrt(std::max(best.value, 0.0)), rank_one_functional(best.u)};
}

inline DualOptimum dual_optimum(const GaussianMeasure& m, const NormSpec& q, const DualSigmaOptions& opt) {
  check_compatible(m, q);
  switch (q.kind()) {
    case NormKind::L2: return dual_l2(m);
    case NormKind::Linf:
    case NormKind::SupGrid: return dual_coordinate(m);
    case NormKind::L1: return dual_l1(m);
    case NormKind::OperatorSym: return dual_operator_sym(m, q.parameter(), opt);
  }
  throw Error(ErrorCode::ConfigError, "unhandled norm kind");
}

}  // namespace detail

// sigma(mu) = sup over the dual unit ball of sqrt(f^T Sigma f), evaluated on
// the extreme points of that ball for each norm kind.
inline double dual_sigma(const GaussianMeasure& m, const NormSpec& q, const DualSigmaOptions& opt = {}) {
  return detail::dual_optimum(m, q, opt).sigma / q.divisor();
}

// Lower bound on Gamma: max of q(L u) over `resolution` sphere points.
inline double primal_gamma(const GaussianMeasure& m, const NormSpec& q, std::size_t resolution,
                           std::uint64_t seed = kDefaultSphereSeed) {
  detail::check_compatible(m, q);
  require(resolution >= 100, ErrorCode::ResolutionTooCoarse, "primal_gamma needs resolution >= 100");
  const std::size_t d = m.dim();
  const SphereSequence seq(d, seed);
  Vector u(d), x(d);
  double best = 0.0;
  const std::size_t count = d == 1 ? 2 : resolution;
  for (std::size_t i = 0; i < count; ++i) {
    seq.point(i, u);
    lower_matvec(m.factor(), u, x);
    best = std::max(best, q(x));
  }
  return best;
}

inline DualWitness extremal_witness(const GaussianMeasure& m, const NormSpec& q, const DualSigmaOptions& opt = {}) {
  auto opt_raw = detail::dual_optimum(m, q, opt);
  const double sigma = opt_raw.sigma;
  require(sigma > 0.0, ErrorCode::NotSPD, "zero dual sigma");
  // x0 = Sigma f0 / sigma lies on the boundary of K and attains f0(x0) = sigma.
  Vector x0 = matvec(m.covariance(), opt_raw.functional);
  for (double& v : x0) v /= sigma;
  Vector f0 = std::move(opt_raw.functional);
  const double gamma = sigma / q.divisor();
  for (double& v : f0) v /= q.divisor();
  return {std::move(x0), std::move(f0), gamma};
}

// sqrt(x^T Sigma^{-1} x) = |L^{-1} x|.
inline double rkhs_norm(const GaussianMeasure& m, std::span<const double> x) {
  require(x.size() == m.dim(), ErrorCode::DimensionMismatch, "rkhs_norm dimension mismatch");
  Vector y(x.begin(), x.end());
  forward_substitute(m.factor(), y);
  return norm2(y);
}

struct DistanceToK {
  double distance = 0.0;
  bool refined = false;        // Newton projection used (L2 only)
  bool refinement_failed = false;  // Newton diverged; distance is the sampled value
};

namespace detail {

// Euclidean projection of x onto { y : y^T Sigma^{-1} y <= 1 } in the
// eigenbasis of Sigma: y_i = lambda_i z_i / (lambda_i + mu) with the
// multiplier mu >= 0 fixed by the boundary condition.
inline std::pair<double, bool> ellipsoid_projection_distance(const GaussianMeasure& m, std::span<const double> x) {
  const auto eig = jacobi_eigen(m.covariance());
  const std::size_t d = m.dim();
  Vector z(d, 0.0);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) z[j] += eig.vectors(i, j) * x[i];
  const auto secular = [&](double mu, double& deriv) {
    double f = -1.0;
    deriv = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double den = eig.values[i] + mu;
      const double t = eig.values[i] * z[i] * z[i] / (den * den);
      f += t;
      deriv -= 2.0 * t / den;
    }
    return f;
  };
  double mu = 0.0;
  bool converged = false;
  for (int it = 0; it < 500; ++it) {
    double deriv;
    const double f = secular(mu, deriv);
    if (!std::isfinite(f) || !std::isfinite(deriv) || deriv >= 0.0) break;
    if (std::abs(f) <= 1e-15) {
      converged = true;
      break;
    }
    const double step = f / deriv;
    mu -= step;
    if (mu < 0.0) mu = 0.0;
    if (std::abs(step) <= 1e-14 * (1.0 + mu)) {
      converged = true;
      break;
    }
  }
  if (!converged) return {0.0, false};
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double r = z[i] * mu / (eig.values[i] + mu);
    s += r * r;
  }
  return {std::sqrt(s), true};
}

}  // namespace detail

// Distance in q from x to K. Points of K are exact zeros; otherwise the
// nearest point is on the boundary, so the search runs over L u with u on a
// sphere sample (interior points of a convex set never beat the boundary for
// an exterior x). Under L2 the sampled value is replaced by the exact
// ellipsoid projection.
inline DistanceToK distance_to_K(const GaussianMeasure& m, const NormSpec& q, std::span<const double> x,
                                 std::size_t resolution, std::uint64_t seed = kDefaultSphereSeed) {
  detail::check_compatible(m, q);
  require(x.size() == m.dim(), ErrorCode::DimensionMismatch, "distance_to_K dimension mismatch");
  require(resolution >= 100, ErrorCode::ResolutionTooCoarse, "distance_to_K needs resolution >= 100");
  DistanceToK out;
  if (rkhs_norm(m, x) <= 1.0) {
    out.refined = q.kind() == NormKind::L2;
    return out;
  }
  const std::size_t d = m.dim();
  const SphereSequence seq(d, seed);
  Vector u(d), p(d), diff(d);
  double best = std::numeric_limits<double>::infinity();
  const std::size_t count = d == 1 ? 2 : resolution;
  for (std::size_t i = 0; i < count; ++i) {
    seq.point(i, u);
    lower_matvec(m.factor(), u, p);
    for (std::size_t j = 0; j < d; ++j) diff[j] = x[j] - p[j];
    best = std::min(best, q(diff));
  }
  out.distance = best;
  if (q.kind() == NormKind::L2) {
    const auto [exact, ok] = detail::ellipsoid_projection_distance(m, x);
    if (ok) {
      out.distance = exact / q.divisor();
      out.refined = true;
    } else {
      out.refinement_failed = true;
    }
  }
  return out;
}

}  // namespace gauss_extrema
