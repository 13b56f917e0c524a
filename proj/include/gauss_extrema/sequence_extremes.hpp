#pragma once

// Partial maxima of Gaussian sequences and the sqrt(2 L n) centering;
// stationary sequences with prescribed correlations; median oracles and
// decay-condition diagnostics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gauss_extrema/error.hpp"
#include "gauss_extrema/gaussian_measure.hpp"
#include "gauss_extrema/linalg.hpp"
#include "gauss_extrema/norms.hpp"
#include "gauss_extrema/rng.hpp"
#include "gauss_extrema/special.hpp"
#include "gauss_extrema/statistics.hpp"

namespace gauss_extrema {

struct MaximaCheckpoint {
  std::uint64_t n = 0;
  double max_value = 0.0;
  double centered = 0.0;  // max_value - sqrt(2 L n)

  bool operator==(const MaximaCheckpoint&) const = default;
};

struct MaximaTrace {
  std::vector<MaximaCheckpoint> checkpoints;

  bool operator==(const MaximaTrace&) const = default;
};

inline void validate_checkpoints(std::span<const std::uint64_t> checkpoints, std::uint64_t limit) {
  require(!checkpoints.empty(), ErrorCode::BadCheckpoints, "no checkpoints");
  std::uint64_t prev = 0;
  for (std::uint64_t n : checkpoints) {
    require(n > prev, ErrorCode::BadCheckpoints, "checkpoints must be positive and strictly increasing");
    require(n <= limit, ErrorCode::BadCheckpoints,
            "checkpoint " + std::to_string(n) + " beyond " + std::to_string(limit) + " values");
    prev = n;
  }
}

enum class Centering { Log, LogLog };  // sqrt(2 L n) or sqrt(2 L L n)

// Incremental running maximum that records at checkpoints.
class MaximaRecorder {
 public:
  explicit MaximaRecorder(std::span<const std::uint64_t> checkpoints, Centering centering = Centering::Log)
      : checkpoints_(checkpoints.begin(), checkpoints.end()), loglog_(centering == Centering::LogLog) {}

  void push(double value) {
    ++count_;
    running_ = std::max(running_, value);
    if (next_ < checkpoints_.size() && count_ == checkpoints_[next_]) {
      const double n = static_cast<double>(count_);
      const double centering = loglog_ ? sqrt_2ll(n) : sqrt_2l(n);
      trace_.checkpoints.push_back({count_, running_, running_ - centering});
      ++next_;
    }
  }

  bool done() const noexcept { return next_ == checkpoints_.size(); }
  std::uint64_t count() const noexcept { return count_; }
  const MaximaTrace& trace() const noexcept { return trace_; }
  MaximaTrace take() { return std::move(trace_); }

 private:
  std::vector<std::uint64_t> checkpoints_;
  bool loglog_;
  std::size_t next_ = 0;
  std::uint64_t count_ = 0;
  double running_ = -std::numeric_limits<double>::infinity();
  MaximaTrace trace_;
};

// Running maximum of already-normalized values at the checkpoints.
inline MaximaTrace partial_maxima(std::span<const double> values, std::span<const std::uint64_t> checkpoints) {
  require(!values.empty(), ErrorCode::EmptyInput, "partial_maxima of empty sequence");
  validate_checkpoints(checkpoints, values.size());
  MaximaRecorder rec(checkpoints);
  for (std::size_t i = 0; i < checkpoints.back(); ++i) rec.push(values[i]);
  return rec.take();
}

// Median of the max of n iid standard normals: Phi^{-1}(2^{-1/n}), taken
// through the upper tail 1 - 2^{-1/n} = -expm1(-ln 2 / n).
inline double median_oracle_iid(std::uint64_t n) {
  require(n >= 1, ErrorCode::NonPositiveInput, "median_oracle_iid needs n >= 1");
  if (n == 1) return 0.0;
  const double tail = -std::expm1(-std::log(2.0) / static_cast<double>(n));
  return normal_quantile_upper(tail);
}

enum class TailKind { Zero, Geometric };

// Autocovariances r_0, r_1, ... of a stationary sequence. Beyond the listed
// lags the tail is zero or continues geometrically from the last entry.
class CorrelationModel {
 public:
  CorrelationModel(std::vector<double> r, TailKind tail = TailKind::Zero, double rate = 0.0)
      : r_(std::move(r)), tail_(tail), rate_(rate) {
    require(!r_.empty(), ErrorCode::EmptyInput, "correlation model needs r_0");
    require(r_[0] > 0.0, ErrorCode::NotPSD, "r_0 must be positive");
    if (tail_ == TailKind::Geometric)
      require(rate_ >= 0.0 && rate_ < 1.0, ErrorCode::NotPSD, "geometric tail rate must lie in [0, 1)");
  }

  static CorrelationModel iid() { return CorrelationModel({1.0}); }

  // r_k = rho^k: the covariance of a unit-variance AR(1) sequence.
  static CorrelationModel geometric(double rho) { return CorrelationModel({1.0}, TailKind::Geometric, rho); }

  // r_0 = 1 and r_k = f(k) for 1 <= k < n_max, zero beyond.
  static CorrelationModel tabulated(const std::function<double(std::uint64_t)>& f, std::uint64_t n_max) {
    std::vector<double> r(n_max);
    r[0] = 1.0;
    for (std::uint64_t k = 1; k < n_max; ++k) r[k] = f(k);
    return CorrelationModel(std::move(r));
  }

  double operator()(std::uint64_t lag) const {
    if (lag < r_.size()) return r_[lag];
    if (tail_ == TailKind::Zero) return 0.0;
    return r_.back() * std::pow(rate_, static_cast<double>(lag - (r_.size() - 1)));
  }

  const std::vector<double>& listed() const noexcept { return r_; }
  TailKind tail() const noexcept { return tail_; }
  double rate() const noexcept { return rate_; }

  // Pure AR(1) covariance: a single listed variance with a geometric tail.
  bool is_ar1() const noexcept { return tail_ == TailKind::Geometric && r_.size() == 1; }

  Matrix toeplitz(std::size_t n) const {
    Matrix t(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) t(i, j) = (*this)(i > j ? i - j : j - i);
    return t;
  }

 private:
  std::vector<double> r_;
  TailKind tail_;
  double rate_;
};

inline constexpr std::size_t kDenseToeplitzCap = 20000;

enum class StationaryMethod {
  Auto,        // AR(1) recursion when exact, dense below the cap, blocks above
  Dense,       // n x n Toeplitz Cholesky; SizeExceeded above the cap
  Ar1,         // exact recursion; model must be AR(1)
  BlockWindow  // conditional blocks given a finite window of the past
};

// Generator for one (model, n) pair. The factorization is built once and
// reused for every draw, so construct it outside the trial loop.
//
// BlockWindow draws block b+1 from its exact conditional law given the last
// `window` values. This is exact for Markov models of order <= window and an
// approximation otherwise: correlations reaching further back than the
// window are dropped.
class StationaryGenerator {
 public:
  StationaryGenerator(CorrelationModel model, std::size_t n, StationaryMethod method = StationaryMethod::Auto,
                      std::size_t window = 256)
      : model_(std::move(model)), n_(n), window_(window) {
    require(n > 0, ErrorCode::EmptyInput, "stationary_sequence needs n >= 1");
    if (method == StationaryMethod::Auto) {
      if (model_.is_ar1())
        method = StationaryMethod::Ar1;
      else if (n <= kDenseToeplitzCap)
        method = StationaryMethod::Dense;
      else
        method = StationaryMethod::BlockWindow;
    }
    method_ = method;
    switch (method_) {
      case StationaryMethod::Ar1:
        require(model_.is_ar1(), ErrorCode::ConfigError, "AR(1) recursion needs a pure geometric model");
        break;
      case StationaryMethod::Dense: {
        require(n <= kDenseToeplitzCap, ErrorCode::SizeExceeded,
                "dense Toeplitz factorization capped at " + std::to_string(kDenseToeplitzCap));
        auto chol = cholesky_psd(model_.toeplitz(n));
        clipped_ = chol.clipped_pivots;
        factor_ = std::move(chol.factor);
        break;
      }
      case StationaryMethod::BlockWindow: build_block_window(); break;
      case StationaryMethod::Auto: break;
    }
  }

  StationaryMethod method() const noexcept { return method_; }
  std::size_t clipped_pivots() const noexcept { return clipped_; }
  std::size_t size() const noexcept { return n_; }

  std::vector<double> sample(RngStream& stream) const {
    std::vector<double> out(n_);
    switch (method_) {
      case StationaryMethod::Ar1: {
        const double sd = std::sqrt(model_(0));
        const double rho = model_.rate();
        const double innov = std::sqrt(1.0 - rho * rho);
        double x = stream.next_normal();
        out[0] = sd * x;
        for (std::size_t i = 1; i < n_; ++i) {
          x = rho * x + innov * stream.next_normal();
          out[i] = sd * x;
        }
        break;
      }
      case StationaryMethod::Dense: {
        std::vector<double> z(n_);
        for (double& v : z) v = stream.next_normal();
        lower_matvec(factor_, z, out);
        break;
      }
      case StationaryMethod::BlockWindow: sample_blocks(stream, out); break;
      case StationaryMethod::Auto: break;
    }
    return out;
  }

 private:
  void build_block_window() {
    const std::size_t w = std::min(window_, n_);
    window_ = w;
    const std::size_t b = w;  // block length
    const Matrix joint = model_.toeplitz(w + b);
    // Leading window block: the distribution of the first w values.
    Matrix head(w, w);
    for (std::size_t i = 0; i < w; ++i)
      for (std::size_t j = 0; j < w; ++j) head(i, j) = joint(i, j);
    head_factor_ = cholesky_psd(head).factor;

    // Conditional law of the next b values given the preceding w, via the
    // Cholesky factor of the joint (w + b) covariance:
    //   next = L21 L11^{-1} past + L22 z.
    const auto chol = cholesky_psd(joint);
    clipped_ = chol.clipped_pivots;
    const Matrix& l = chol.factor;
    Matrix l11(w, w), l21(b, w);
    cond_factor_ = Matrix(b, b);
    for (std::size_t i = 0; i < w; ++i)
      for (std::size_t j = 0; j <= i; ++j) l11(i, j) = l(i, j);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < w; ++j) l21(i, j) = l(w + i, j);
      for (std::size_t j = 0; j <= i; ++j) cond_factor_(i, j) = l(w + i, w + j);
    }
    l11_ = std::move(l11);
    l21_ = std::move(l21);
  }

  void sample_blocks(RngStream& stream, std::vector<double>& out) const {
    const std::size_t w = window_;
    std::vector<double> z(w);
    for (double& v : z) v = stream.next_normal();
    std::vector<double> head(w);
    lower_matvec(head_factor_, z, head);
    std::copy(head.begin(), head.begin() + static_cast<std::ptrdiff_t>(std::min(w, n_)), out.begin());
    std::size_t filled = std::min(w, n_);
    std::vector<double> white(w), next(w), noise(w);
    while (filled < n_) {
      // Whitened past: solve L11 white = past.
      std::copy(out.begin() + static_cast<std::ptrdiff_t>(filled - w), out.begin() + static_cast<std::ptrdiff_t>(filled),
                white.begin());
      for (std::size_t i = 0; i < w; ++i) {
        double s = white[i];
        for (std::size_t k = 0; k < i; ++k) s -= l11_(i, k) * white[k];
        white[i] = l11_(i, i) > 0.0 ? s / l11_(i, i) : 0.0;
      }
      for (double& v : z) v = stream.next_normal();
      lower_matvec(cond_factor_, z, noise);
      const std::size_t take = std::min(w, n_ - filled);
      for (std::size_t i = 0; i < take; ++i) {
        double s = noise[i];
        for (std::size_t k = 0; k < w; ++k) s += l21_(i, k) * white[k];
        out[filled + i] = s;
      }
      filled += take;
    }
  }

  CorrelationModel model_;
  std::size_t n_;
  std::size_t window_;
  StationaryMethod method_ = StationaryMethod::Dense;
  std::size_t clipped_ = 0;
  Matrix factor_;
  Matrix head_factor_, l11_, l21_, cond_factor_;
};

inline std::vector<double> stationary_sequence(const CorrelationModel& model, std::size_t n, RngStream& stream,
                                               StationaryMethod method = StationaryMethod::Auto) {
  return StationaryGenerator(model, n, method).sample(stream);
}

struct ConditionDiagnostic {
  std::vector<std::pair<std::uint64_t, double>> rows;
  bool convergent = false;
};

inline constexpr double kConditionThreshold = 0.1;

// Convergent when, over the last half of the range, the values stay below
// the threshold in absolute value and never increase.
inline bool eventually_small_and_decreasing(const std::vector<std::pair<std::uint64_t, double>>& rows) {
  if (rows.empty()) return true;
  const std::size_t start = rows.size() / 2;
  for (std::size_t i = start; i < rows.size(); ++i) {
    if (!(std::abs(rows[i].second) < kConditionThreshold)) return false;
    if (i > start && std::abs(rows[i].second) > std::abs(rows[i - 1].second) * (1.0 + 1e-12) + 1e-300) return false;
  }
  return true;
}

// (n, n r_n) for n = 1..n_max.
inline ConditionDiagnostic berman_condition(const CorrelationModel& model, std::uint64_t n_max) {
  ConditionDiagnostic out;
  out.rows.reserve(n_max);
  for (std::uint64_t n = 1; n <= n_max; ++n) out.rows.emplace_back(n, static_cast<double>(n) * model(n));
  out.convergent = eventually_small_and_decreasing(out.rows);
  return out;
}

// (n, ln(n) r_n) for n = 1..n_max.
inline ConditionDiagnostic log_condition(const CorrelationModel& model, std::uint64_t n_max) {
  ConditionDiagnostic out;
  out.rows.reserve(n_max);
  for (std::uint64_t n = 1; n <= n_max; ++n)
    out.rows.emplace_back(n, std::log(static_cast<double>(n)) * model(n));
  out.convergent = eventually_small_and_decreasing(out.rows);
  return out;
}

struct GapSummary {
  double median = 0.0;
  double q90 = 0.0;
};

inline constexpr std::size_t kMinSymmetrizationTrials = 100;

// Summary of |a_i - b_i| for two independent samples of the same maximum.
inline GapSummary symmetrization_gap(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::LengthMismatch, "symmetrization_gap needs equal lengths");
  require(a.size() >= kMinSymmetrizationTrials, ErrorCode::LengthMismatch,
          "symmetrization_gap needs at least 100 trials");
  std::vector<double> gaps(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) gaps[i] = std::abs(a[i] - b[i]);
  return {median(gaps), quantile(gaps, 0.9)};
}

struct VaryingGammaResult {
  MaximaTrace tilde;  // normalised by Gamma_k
  MaximaTrace plain;  // normalised by the limit Gamma
  ConditionDiagnostic condition;  // (k, |Gamma_k / Gamma - 1| sqrt(L k))
  std::vector<double> gammas;     // Gamma_k, k = 1..n
  double limit_gamma = 0.0;
};

inline std::vector<double> measure_gammas(std::span<const GaussianMeasure> measures, const NormSpec& norm) {
  std::vector<double> out;
  out.reserve(measures.size());
  for (const auto& m : measures) out.push_back(dual_sigma(m, norm));
  return out;
}

// X_k ~ measures[k-1] independently, with Gamma_k = gammas[k-1] precomputed
// so that repeated trials do not redo the dual optimization.
inline VaryingGammaResult varying_gamma_maxima(std::span<const GaussianMeasure> measures, std::span<const double> gammas,
                                               double limit_gamma, const NormSpec& norm,
                                               std::span<const std::uint64_t> checkpoints, RngStream& stream) {
  require(!measures.empty(), ErrorCode::EmptyInput, "varying_gamma_maxima needs measures");
  require(gammas.size() == measures.size(), ErrorCode::LengthMismatch, "one Gamma_k per measure");
  require(limit_gamma > 0.0, ErrorCode::NonPositiveInput, "limit gamma must be positive");
  validate_checkpoints(checkpoints, measures.size());
  const std::size_t d = measures.front().dim();
  for (const auto& m : measures)
    require(m.dim() == d, ErrorCode::DimensionMismatch, "all measures must share one dimension");
  VaryingGammaResult out;
  out.limit_gamma = limit_gamma;
  const std::uint64_t n = checkpoints.back();
  out.gammas.assign(gammas.begin(), gammas.begin() + static_cast<std::ptrdiff_t>(n));
  MaximaRecorder tilde(checkpoints), plain(checkpoints);
  Vector x(d), z(d);
  for (std::uint64_t k = 1; k <= n; ++k) {
    const double gk = gammas[k - 1];
    out.condition.rows.emplace_back(k, std::abs(gk / limit_gamma - 1.0) * std::sqrt(big_l(static_cast<double>(k))));
    measures[k - 1].sample_into(stream, x, z);
    const double qx = norm(x);
    tilde.push(qx / gk);
    plain.push(qx / limit_gamma);
  }
  out.condition.convergent = eventually_small_and_decreasing(out.condition.rows);
  out.tilde = tilde.take();
  out.plain = plain.take();
  return out;
}

// The limit measure supplies Gamma.
inline VaryingGammaResult varying_gamma_maxima(std::span<const GaussianMeasure> measures, const GaussianMeasure& limit,
                                               const NormSpec& norm, std::span<const std::uint64_t> checkpoints,
                                               RngStream& stream) {
  require(!measures.empty(), ErrorCode::EmptyInput, "varying_gamma_maxima needs measures");
  require(limit.dim() == measures.front().dim(), ErrorCode::DimensionMismatch,
          "all measures must share one dimension");
  const auto gammas = measure_gammas(measures, norm);
  return varying_gamma_maxima(measures, gammas, dual_sigma(limit, norm), norm, checkpoints, stream);
}

struct IidMaxima {
  MaximaTrace norm;    // max q(X_k) / Gamma
  MaximaTrace signed_max;  // max f0(X_k) / Gamma, empty when no functional is given
};

// X_1, X_2, ... iid with law m, drawn in order from the stream. With f0 the
// dual witness, f0(X_k) / Gamma is standard normal for every dimension.
inline IidMaxima iid_maxima(const GaussianMeasure& m, const NormSpec& q, double gamma, std::span<const double> f0,
                            std::span<const std::uint64_t> checkpoints, RngStream& stream) {
  validate_checkpoints(checkpoints, std::numeric_limits<std::uint64_t>::max());
  require(q.dim() == m.dim(), ErrorCode::DimensionMismatch, "norm and measure dimensions differ");
  require(gamma > 0.0, ErrorCode::NonPositiveInput, "gamma must be positive");
  require(f0.empty() || f0.size() == m.dim(), ErrorCode::DimensionMismatch, "functional dimension mismatch");
  MaximaRecorder norm_rec(checkpoints), signed_rec(checkpoints);
  Vector x(m.dim()), z(m.dim());
  while (!norm_rec.done()) {
    m.sample_into(stream, x, z);
    norm_rec.push(q(x) / gamma);
    if (!f0.empty()) signed_rec.push(dot(f0, x) / gamma);
  }
  return {norm_rec.take(), signed_rec.take()};
}

}  // namespace gauss_extrema
