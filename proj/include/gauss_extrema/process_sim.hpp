#pragma once

// gamma-Brownian motion and the Ornstein-Uhlenbeck process
// Y(t) = e^{-t/2} W(e^t) on R^d, unit-time blocks, covariance-decay and
// stationarity diagnostics, grid suprema and the Darling-Erdos statistic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gauss_extrema/error.hpp"
#include "gauss_extrema/gaussian_measure.hpp"
#include "gauss_extrema/linalg.hpp"
#include "gauss_extrema/norms.hpp"
#include "gauss_extrema/rng.hpp"
#include "gauss_extrema/sequence_extremes.hpp"
#include "gauss_extrema/special.hpp"

namespace gauss_extrema {

// Values are stored row-major: point i occupies data[i*dim, (i+1)*dim).
struct SamplePath {
  std::vector<double> times;
  std::size_t dim = 0;
  std::vector<double> data;

  std::size_t size() const noexcept { return times.size(); }
  std::span<const double> value(std::size_t i) const { return {data.data() + i * dim, dim}; }
  std::span<double> value(std::size_t i) { return {data.data() + i * dim, dim}; }
};

struct BlockFamily {
  std::vector<SamplePath> blocks;  // block k (0-based) is Y on [k, k+1], times shifted to [0, 1]
  std::size_t grid_size = 0;       // points per block, endpoints included
};

inline void validate_times(std::span<const double> times) {
  require(!times.empty(), ErrorCode::EmptyInput, "empty time grid");
  require(times.front() >= 0.0, ErrorCode::NonPositiveInput, "times must be non-negative");
  for (std::size_t i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1], ErrorCode::BadCheckpoints, "times must be strictly increasing");
}

// W on the given times with W(0) = 0 and independent increments of law
// gamma scaled by sqrt(t - s).
inline SamplePath simulate_brownian(const GaussianMeasure& gamma, std::span<const double> times, RngStream& stream) {
  validate_times(times);
  const std::size_t d = gamma.dim();
  SamplePath path{{times.begin(), times.end()}, d, std::vector<double>(times.size() * d, 0.0)};
  Vector incr(d), z(d);
  double prev_t = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double dt = times[i] - prev_t;
    auto cur = path.value(i);
    if (i > 0) std::copy(path.value(i - 1).begin(), path.value(i - 1).end(), cur.begin());
    if (dt > 0.0) {
      gamma.sample_into(stream, incr, z);
      const double s = std::sqrt(dt);
      for (std::size_t j = 0; j < d; ++j) cur[j] += s * incr[j];
    }
    prev_t = times[i];
  }
  return path;
}

// One step Y(t + dt) = decay * Y(t) + noise * xi with xi ~ gamma.
struct OuCoefficients {
  double decay = 1.0;
  double noise = 0.0;
};

// Exact transition of Y(t) = e^{-t/2} W(e^t) over a step dt.
inline OuCoefficients ou_exact_coefficients(double dt) {
  return {std::exp(-0.5 * dt), std::sqrt(-std::expm1(-dt))};
}

// Y on the uniform grid {0, dt, ..., steps * dt}, started from gamma.
inline SamplePath ou_path(const GaussianMeasure& gamma, double dt, std::size_t steps, RngStream& stream,
                          OuCoefficients coeff) {
  require(dt > 0.0, ErrorCode::NonPositiveInput, "OU grid step must be positive");
  const std::size_t d = gamma.dim();
  SamplePath path{std::vector<double>(steps + 1), d, std::vector<double>((steps + 1) * d)};
  Vector xi(d), z(d);
  gamma.sample_into(stream, path.value(0), z);
  for (std::size_t i = 1; i <= steps; ++i) {
    path.times[i] = static_cast<double>(i) * dt;
    gamma.sample_into(stream, xi, z);
    auto prev = path.value(i - 1);
    auto cur = path.value(i);
    for (std::size_t j = 0; j < d; ++j) cur[j] = coeff.decay * prev[j] + coeff.noise * xi[j];
  }
  return path;
}

inline SamplePath ou_path(const GaussianMeasure& gamma, double dt, std::size_t steps, RngStream& stream) {
  return ou_path(gamma, dt, steps, stream, ou_exact_coefficients(dt));
}

// Y at arbitrary increasing times (first time >= 0), exact transitions between them.
inline SamplePath ou_at_times(const GaussianMeasure& gamma, std::span<const double> times, RngStream& stream) {
  validate_times(times);
  const std::size_t d = gamma.dim();
  SamplePath path{{times.begin(), times.end()}, d, std::vector<double>(times.size() * d)};
  Vector xi(d), z(d);
  gamma.sample_into(stream, path.value(0), z);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const auto c = ou_exact_coefficients(times[i] - times[i - 1]);
    gamma.sample_into(stream, xi, z);
    auto prev = path.value(i - 1);
    auto cur = path.value(i);
    for (std::size_t j = 0; j < d; ++j) cur[j] = c.decay * prev[j] + c.noise * xi[j];
  }
  return path;
}

// Time change of a Brownian path on positive times s into the OU path at
// times ln s: Y(ln s) = W(s) / sqrt(s).
inline SamplePath ou_time_change(const SamplePath& brownian) {
  SamplePath out{std::vector<double>(brownian.size()), brownian.dim, std::vector<double>(brownian.data.size())};
  for (std::size_t i = 0; i < brownian.size(); ++i) {
    const double s = brownian.times[i];
    require(s > 0.0, ErrorCode::NonPositiveInput, "OU time change needs positive Brownian times");
    out.times[i] = std::log(s);
    const double root = std::sqrt(s);
    auto src = brownian.value(i);
    auto dst = out.value(i);
    for (std::size_t j = 0; j < brownian.dim; ++j) dst[j] = src[j] / root;
  }
  return out;
}

// Splits a path on [0, n] with grid step 1/p into n unit blocks sharing
// endpoints.
inline BlockFamily extract_blocks(const SamplePath& path) {
  require(path.size() >= 2, ErrorCode::MisalignedGrid, "path too short for blocks");
  require(path.times.front() == 0.0, ErrorCode::MisalignedGrid, "path must start at t = 0");
  const double step = path.times[1] - path.times[0];
  const double per_unit = 1.0 / step;
  const auto p = static_cast<std::size_t>(std::llround(per_unit));
  require(p >= 1 && std::abs(per_unit - static_cast<double>(p)) < 1e-9 * per_unit, ErrorCode::MisalignedGrid,
          "grid step does not divide unit time");
  require((path.size() - 1) % p == 0, ErrorCode::MisalignedGrid, "path does not end on an integer time");
  for (std::size_t i = 0; i < path.size(); ++i)
    require(std::abs(path.times[i] - static_cast<double>(i) / static_cast<double>(p)) < 1e-9 * (1.0 + path.times[i]),
            ErrorCode::MisalignedGrid, "grid is not uniform");
  const std::size_t n = (path.size() - 1) / p;
  BlockFamily fam;
  fam.grid_size = p + 1;
  fam.blocks.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    SamplePath b{std::vector<double>(p + 1), path.dim, std::vector<double>((p + 1) * path.dim)};
    for (std::size_t i = 0; i <= p; ++i) {
      b.times[i] = static_cast<double>(i) / static_cast<double>(p);
      auto src = path.value(k * p + i);
      std::copy(src.begin(), src.end(), b.value(i).begin());
    }
    fam.blocks.push_back(std::move(b));
  }
  return fam;
}

inline double path_sup(const SamplePath& path, const NormSpec& q) {
  double m = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) m = std::max(m, q(path.value(i)));
  return m;
}

// Grid supremum of q(Y(t)) / gamma over t <= T at each checkpoint T,
// centered by sqrt(2 L T).
inline MaximaTrace path_sup_maxima(const SamplePath& path, const NormSpec& q, double gamma,
                                   std::span<const std::uint64_t> t_checkpoints) {
  require(gamma > 0.0, ErrorCode::NonPositiveInput, "gamma must be positive");
  require(!t_checkpoints.empty(), ErrorCode::BadCheckpoints, "no checkpoints");
  MaximaTrace trace;
  double running = 0.0;
  std::size_t i = 0;
  std::uint64_t prev = 0;
  for (std::uint64_t t : t_checkpoints) {
    require(t > prev, ErrorCode::BadCheckpoints, "checkpoints must be positive and strictly increasing");
    prev = t;
    const double limit = static_cast<double>(t) + 1e-9;
    for (; i < path.size() && path.times[i] <= limit; ++i) running = std::max(running, q(path.value(i)) / gamma);
    const double td = static_cast<double>(t);
    trace.checkpoints.push_back({t, running, running - sqrt_2l(td)});
  }
  return trace;
}

// Streaming version: simulates Y with step dt up to the last checkpoint
// without storing the path. Consumes the stream exactly as ou_path does.
inline MaximaTrace ou_sup_trace(const GaussianMeasure& gamma_measure, const NormSpec& q, double gamma, double dt,
                                std::span<const std::uint64_t> t_checkpoints, RngStream& stream) {
  require(gamma > 0.0, ErrorCode::NonPositiveInput, "gamma must be positive");
  require(dt > 0.0, ErrorCode::NonPositiveInput, "OU grid step must be positive");
  require(!t_checkpoints.empty(), ErrorCode::BadCheckpoints, "no checkpoints");
  const std::size_t d = gamma_measure.dim();
  const auto coeff = ou_exact_coefficients(dt);
  Vector y(d), xi(d), z(d);
  gamma_measure.sample_into(stream, y, z);
  double running = q(y) / gamma;
  MaximaTrace trace;
  std::size_t i = 0;
  std::uint64_t prev = 0;
  for (std::uint64_t t : t_checkpoints) {
    require(t > prev, ErrorCode::BadCheckpoints, "checkpoints must be positive and strictly increasing");
    prev = t;
    const double limit = static_cast<double>(t) + 1e-9;
    while (static_cast<double>(i + 1) * dt <= limit) {
      gamma_measure.sample_into(stream, xi, z);
      for (std::size_t j = 0; j < d; ++j) y[j] = coeff.decay * y[j] + coeff.noise * xi[j];
      running = std::max(running, q(y) / gamma);
      ++i;
    }
    trace.checkpoints.push_back({t, running, running - sqrt_2l(static_cast<double>(t))});
  }
  return trace;
}

// h(x) = sum_j weight_j * dual_j . x(time_j) for a path x on [0, 1].
struct EvaluationTerm {
  double time = 0.0;
  double weight = 0.0;
  Vector dual;
};

struct BlockFunctional {
  std::vector<EvaluationTerm> terms;

  // Total variation of the weights times the dual norms of the vectors:
  // the operator norm of h on (C_E[0,1], sup q) when the times are distinct
  // and the duals are norming; an upper bound in general.
  double norm(const NormSpec& q) const {
    double s = 0.0;
    for (const auto& t : terms) s += std::abs(t.weight) * q.dual(t.dual);
    return s;
  }
};

struct DecayEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  double bound = 0.0;        // e^{-(k-2)/2} sigma^2(gamma) ||h||^2
  double closed_form = 0.0;  // exact E[h(X_1) h(X_k)] for evaluation functionals
};

// Exact E[h(X_1) h(X_k)] where X_k(t) = Y(t + k - 1).
inline double ou_functional_cross_covariance(const GaussianMeasure& gamma, const BlockFunctional& h, std::uint64_t k) {
  double s = 0.0;
  for (const auto& a : h.terms)
    for (const auto& b : h.terms) {
      const double lag = std::abs(static_cast<double>(k - 1) + b.time - a.time);
      s += a.weight * b.weight * gamma.covariance_form(a.dual, b.dual) * std::exp(-0.5 * lag);
    }
  return s;
}

inline DecayEstimate covariance_decay(const GaussianMeasure& gamma, const NormSpec& q, const BlockFunctional& h,
                                      std::uint64_t k, std::size_t trials, std::uint64_t seed,
                                      std::uint64_t stream_tag = 0) {
  require(k >= 2, ErrorCode::BadCheckpoints, "covariance_decay needs k >= 2");
  require(trials >= 2, ErrorCode::TooFewTrials, "covariance_decay needs at least two trials");
  require(!h.terms.empty(), ErrorCode::BadFunctional, "functional has no terms");
  for (const auto& t : h.terms) {
    require(t.time >= 0.0 && t.time <= 1.0, ErrorCode::BadFunctional, "evaluation time outside [0, 1]");
    require(t.dual.size() == gamma.dim(), ErrorCode::DimensionMismatch, "dual vector dimension mismatch");
  }
  const double hnorm = h.norm(q);
  require(hnorm > 0.0, ErrorCode::BadFunctional, "functional has zero total variation");

  // Evaluation times on blocks 1 and k, merged and sorted.
  std::vector<double> times;
  for (const auto& t : h.terms) {
    times.push_back(t.time);
    times.push_back(static_cast<double>(k - 1) + t.time);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::vector<std::size_t> idx_first, idx_kth;
  for (const auto& t : h.terms) {
    idx_first.push_back(static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t.time) - times.begin()));
    idx_kth.push_back(static_cast<std::size_t>(
        std::lower_bound(times.begin(), times.end(), static_cast<double>(k - 1) + t.time) - times.begin()));
  }

  std::vector<double> products(trials);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    RngStream stream(seed, trial, stream_tag);
    const SamplePath y = ou_at_times(gamma, times, stream);
    double h1 = 0.0, hk = 0.0;
    for (std::size_t j = 0; j < h.terms.size(); ++j) {
      h1 += h.terms[j].weight * dot(h.terms[j].dual, y.value(idx_first[j]));
      hk += h.terms[j].weight * dot(h.terms[j].dual, y.value(idx_kth[j]));
    }
    products[trial] = h1 * hk;
  }
  DecayEstimate out;
  out.estimate = mean(products);
  out.standard_error = standard_error(products);
  const double sigma = dual_sigma(gamma, q);
  out.bound = std::exp(-0.5 * static_cast<double>(k - 2)) * sigma * sigma * hnorm * hnorm;
  out.closed_form = ou_functional_cross_covariance(gamma, h, k);
  return out;
}

struct StationarityResult {
  double max_discrepancy = 0.0;  // max |Cov(Y(s),Y(t)) - Cov(Y(s+h),Y(t+h))| over entries and grid pairs
  double max_z = 0.0;            // the same, each entry divided by its paired standard error
};

// Compares empirical second moments on a grid with those on the shifted
// grid. Grid points and the shift must be multiples of dt; every trial runs
// the recursion with the given coefficients from Y(0) ~ gamma.
inline StationarityResult stationarity_check(const GaussianMeasure& gamma, double shift, std::span<const double> grid,
                                             double dt, std::size_t trials, std::uint64_t seed,
                                             OuCoefficients coeff, std::uint64_t stream_tag = 0) {
  require(shift >= 0.0, ErrorCode::NonPositiveInput, "shift must be non-negative");
  require(trials >= 2, ErrorCode::TooFewTrials, "stationarity_check needs at least two trials");
  validate_times(grid);
  const auto to_index = [dt](double t) {
    const double r = t / dt;
    const auto i = static_cast<std::size_t>(std::llround(r));
    require(std::abs(r - static_cast<double>(i)) < 1e-9 * (1.0 + r), ErrorCode::MisalignedGrid,
            "time is not a multiple of the OU step");
    return i;
  };
  std::vector<std::size_t> base, shifted;
  for (double t : grid) {
    base.push_back(to_index(t));
    shifted.push_back(to_index(t + shift));
  }
  const std::size_t steps = shifted.back();
  const std::size_t d = gamma.dim();
  const std::size_t g = grid.size();
  const std::size_t entries = g * g * d * d;
  std::vector<double> sum_a(entries, 0.0), sum_b(entries, 0.0), sum_diff(entries, 0.0), sum_diff2(entries, 0.0);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    RngStream stream(seed, trial, stream_tag);
    const SamplePath y = ou_path(gamma, dt, std::max<std::size_t>(steps, 1), stream, coeff);
    std::size_t e = 0;
    for (std::size_t a = 0; a < g; ++a)
      for (std::size_t b = 0; b < g; ++b)
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j < d; ++j, ++e) {
            const double pa = y.value(base[a])[i] * y.value(base[b])[j];
            const double pb = y.value(shifted[a])[i] * y.value(shifted[b])[j];
            sum_a[e] += pa;
            sum_b[e] += pb;
            sum_diff[e] += pa - pb;
            sum_diff2[e] += (pa - pb) * (pa - pb);
          }
  }
  StationarityResult out;
  const double nt = static_cast<double>(trials);
  for (std::size_t e = 0; e < entries; ++e) {
    const double diff = (sum_a[e] - sum_b[e]) / nt;
    const double mean_diff = sum_diff[e] / nt;
    const double var = std::max(0.0, (sum_diff2[e] - nt * mean_diff * mean_diff) / (nt - 1.0));
    const double se = std::sqrt(var / nt);
    out.max_discrepancy = std::max(out.max_discrepancy, std::abs(diff));
    if (se > 0.0) out.max_z = std::max(out.max_z, std::abs(diff) / se);
  }
  return out;
}

inline StationarityResult stationarity_check(const GaussianMeasure& gamma, double shift, std::span<const double> grid,
                                             double dt, std::size_t trials, std::uint64_t seed) {
  return stationarity_check(gamma, shift, grid, dt, trials, seed, ou_exact_coefficients(dt));
}

struct CovarianceCheck {
  double max_z = 0.0;           // over all grid pairs s <= t and all entries
  double marginal_max_z = 0.0;  // s == t only
  double max_abs_error = 0.0;
};

// Empirical E[Y(s) Y(t)^T] on grid pairs against e^{-|t-s|/2} Sigma, each
// entry in units of its Monte Carlo standard error.
inline CovarianceCheck ou_covariance_check(const GaussianMeasure& gamma, std::span<const double> grid, double dt,
                                           std::size_t trials, std::uint64_t seed, OuCoefficients coeff,
                                           std::uint64_t stream_tag = 0) {
  require(trials >= 2, ErrorCode::TooFewTrials, "ou_covariance_check needs at least two trials");
  validate_times(grid);
  std::vector<std::size_t> idx;
  for (double t : grid) {
    const double r = t / dt;
    const auto i = static_cast<std::size_t>(std::llround(r));
    require(std::abs(r - static_cast<double>(i)) < 1e-9 * (1.0 + r), ErrorCode::MisalignedGrid,
            "time is not a multiple of the OU step");
    idx.push_back(i);
  }
  const std::size_t d = gamma.dim();
  const std::size_t g = grid.size();
  const std::size_t entries = g * g * d * d;
  std::vector<double> sum(entries, 0.0), sum2(entries, 0.0);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    RngStream stream(seed, trial, stream_tag);
    const SamplePath y = ou_path(gamma, dt, std::max<std::size_t>(idx.back(), 1), stream, coeff);
    std::size_t e = 0;
    for (std::size_t a = 0; a < g; ++a)
      for (std::size_t b = 0; b < g; ++b)
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j < d; ++j, ++e) {
            const double p = y.value(idx[a])[i] * y.value(idx[b])[j];
            sum[e] += p;
            sum2[e] += p * p;
          }
  }
  CovarianceCheck out;
  const double nt = static_cast<double>(trials);
  std::size_t e = 0;
  for (std::size_t a = 0; a < g; ++a)
    for (std::size_t b = 0; b < g; ++b)
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j, ++e) {
          const double m = sum[e] / nt;
          const double var = std::max(0.0, (sum2[e] - nt * m * m) / (nt - 1.0));
          const double se = std::sqrt(var / nt);
          const double exact = std::exp(-0.5 * std::abs(grid[b] - grid[a])) * gamma.covariance()(i, j);
          const double err = std::abs(m - exact);
          out.max_abs_error = std::max(out.max_abs_error, err);
          if (se > 0.0) {
            out.max_z = std::max(out.max_z, err / se);
            if (a == b) out.marginal_max_z = std::max(out.marginal_max_z, err / se);
          }
        }
  return out;
}

// alpha_n = sqrt(2 LLn), beta_n = 2 LLn + (1/2) LLLn - (1/2) L(4 pi).
struct DarlingErdosConstants {
  double alpha = 0.0;
  double beta = 0.0;
};

inline DarlingErdosConstants darling_erdos_constants(double n) {
  const double ll = big_ll(n);
  const double lll = big_l(ll);
  return {std::sqrt(2.0 * ll), 2.0 * ll + 0.5 * lll - 0.5 * big_l(4.0 * std::numbers::pi)};
}

inline constexpr std::uint64_t kMinDarlingErdosLength = 3;

// alpha_n (max_{k<=n} S_k / sqrt(k)) - beta_n for the partial sums of xi.
inline double darling_erdos_statistic(std::span<const double> xi) {
  require(xi.size() >= kMinDarlingErdosLength, ErrorCode::TooShort, "Darling-Erdos statistic needs n >= 3");
  double s = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < xi.size(); ++k) {
    s += xi[k];
    best = std::max(best, s / std::sqrt(static_cast<double>(k + 1)));
  }
  const auto c = darling_erdos_constants(static_cast<double>(xi.size()));
  return c.alpha * best - c.beta;
}

// max_{k<=n} q(S_k / (sqrt(k) Gamma)) - sqrt(2 LLn) for vectors g_1..g_n,
// stored row-major with the norm's dimension.
inline double normalized_sum_maxima(std::span<const double> g, const NormSpec& q, double gamma) {
  const std::size_t d = q.dim();
  require(g.size() % d == 0, ErrorCode::DimensionMismatch, "sample block is not a multiple of the dimension");
  const std::size_t n = g.size() / d;
  require(n >= kMinDarlingErdosLength, ErrorCode::TooShort, "normalized sum maxima need n >= 3");
  require(gamma > 0.0, ErrorCode::NonPositiveInput, "gamma must be positive");
  Vector s(d, 0.0), scaled(d);
  double best = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double root = std::sqrt(static_cast<double>(k + 1));
    for (std::size_t j = 0; j < d; ++j) {
      s[j] += g[k * d + j];
      scaled[j] = s[j] / root;
    }
    best = std::max(best, q(scaled) / gamma);
  }
  return best - sqrt_2ll(static_cast<double>(n));
}

struct OuIdentityCheck {
  double direct = 0.0;   // max_k S_k / sqrt(k)
  double through_ou = 0.0;  // max_k Y(ln k) from the time-changed path
  bool exact = false;
};

// Builds xi from a simulated Brownian path on integer times 1..n and
// evaluates the running maximum both directly and through Y(ln k).
inline OuIdentityCheck darling_erdos_ou_crosscheck(std::size_t n, RngStream& stream) {
  require(n >= kMinDarlingErdosLength, ErrorCode::TooShort, "cross-check needs n >= 3");
  const GaussianMeasure unit = GaussianMeasure::standard(1);
  std::vector<double> times(n);
  for (std::size_t k = 0; k < n; ++k) times[k] = static_cast<double>(k + 1);
  const SamplePath w = simulate_brownian(unit, times, stream);
  OuIdentityCheck out;
  out.direct = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    // S_k = W(k): the partial sums of the unit increments are the path itself.
    out.direct = std::max(out.direct, w.value(k)[0] / std::sqrt(static_cast<double>(k + 1)));
  }
  const SamplePath y = ou_time_change(w);
  out.through_ou = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) out.through_ou = std::max(out.through_ou, y.value(k)[0]);
  out.exact = out.direct == out.through_ou;
  return out;
}

}  // namespace gauss_extrema
