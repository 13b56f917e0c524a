#pragma once

// Random real symmetric matrices, their spectra, the Hausdorff metric on
// finite spectra and the cluster set of normalized spectra.

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
#include "gauss_extrema/gaussian_measure.hpp"
#include "gauss_extrema/linalg.hpp"
#include "gauss_extrema/norms.hpp"
#include "gauss_extrema/packed.hpp"
#include "gauss_extrema/rng.hpp"
#include "gauss_extrema/sequence_extremes.hpp"
#include "gauss_extrema/special.hpp"
#include "gauss_extrema/sphere.hpp"
#include "gauss_extrema/statistics.hpp"

namespace gauss_extrema {

inline constexpr std::size_t kMaxEigenSide = 64;
inline constexpr std::size_t kMaxClusterSide = 8;

// Upper triangle stored once, row by row; reads below the diagonal mirror it.
class SymMatrix {
 public:
  explicit SymMatrix(std::size_t side) : side_(side), packed_(packed_size(side), 0.0) {
    require(side > 0, ErrorCode::DimensionMismatch, "matrix side must be positive");
  }

  static SymMatrix from_packed(std::size_t side, std::span<const double> packed) {
    require(packed.size() == packed_size(side), ErrorCode::DimensionMismatch,
            "packed vector of size " + std::to_string(packed.size()) + " for side " + std::to_string(side));
    SymMatrix a(side);
    std::copy(packed.begin(), packed.end(), a.packed_.begin());
    return a;
  }

  // Takes the upper triangle of a square matrix.
  static SymMatrix from_upper(const Matrix& m) {
    require(m.rows() == m.cols(), ErrorCode::DimensionMismatch, "matrix is not square");
    SymMatrix a(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = i; j < m.cols(); ++j) a.set(i, j, m(i, j));
    return a;
  }

  std::size_t side() const noexcept { return side_; }
  std::span<const double> packed() const noexcept { return packed_; }
  std::span<double> packed() noexcept { return packed_; }

  double operator()(std::size_t i, std::size_t j) const { return packed_[packed_index(side_, i, j)]; }
  void set(std::size_t i, std::size_t j, double v) { packed_[packed_index(side_, i, j)] = v; }

  Matrix to_matrix() const { return unpack_symmetric(side_, packed_); }

  double trace() const {
    double s = 0.0;
    for (std::size_t i = 0; i < side_; ++i) s += (*this)(i, i);
    return s;
  }

  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
    require(a.side_ == b.side_, ErrorCode::DimensionMismatch, "matrix sides differ");
    SymMatrix out(a.side_);
    for (std::size_t k = 0; k < a.packed_.size(); ++k) out.packed_[k] = a.packed_[k] - b.packed_[k];
    return out;
  }

 private:
  std::size_t side_;
  std::vector<double> packed_;
};

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending

  std::size_t size() const noexcept { return eigenvalues.size(); }
  double radius() const {
    require(!eigenvalues.empty(), ErrorCode::EmptySet, "empty spectrum");
    return std::max(std::abs(eigenvalues.front()), std::abs(eigenvalues.back()));
  }
  std::vector<double> positive_part() const {
    std::vector<double> out;
    for (double v : eigenvalues)
      if (v > 0.0) out.push_back(v);
    return out;
  }
  std::vector<double> negative_part() const {
    std::vector<double> out;
    for (double v : eigenvalues)
      if (v < 0.0) out.push_back(v);
    return out;
  }
};

inline EigenDecomposition symm_eigen_full(const SymMatrix& a) {
  require(a.side() <= kMaxEigenSide, ErrorCode::DimensionTooLarge,
          "eigensolver supports side <= 64, got " + std::to_string(a.side()));
  return jacobi_eigen(a.to_matrix());
}

inline Spectrum symm_eigen(const SymMatrix& a) { return {symm_eigen_full(a).values}; }

// Operator norm, which for a symmetric matrix is max |lambda|.
inline double spectral_radius(const SymMatrix& a) {
  require(a.side() <= kMaxEigenSide, ErrorCode::DimensionTooLarge,
          "eigensolver supports side <= 64, got " + std::to_string(a.side()));
  return packed_spectral_radius(a.side(), a.packed());
}

// Sorted eigenvalues of the mirrored packed vector, in closed form for
// sides 1 and 2.
inline void packed_spectrum(std::size_t side, std::span<const double> packed, std::span<double> out) {
  if (side == 1) {
    out[0] = packed[0];
    return;
  }
  if (side == 2) {
    const double mean = 0.5 * (packed[0] + packed[2]);
    const double r = std::hypot(0.5 * (packed[0] - packed[2]), packed[1]);
    out[0] = mean - r;
    out[1] = mean + r;
    return;
  }
  const auto eig = jacobi_eigen(unpack_symmetric(side, packed));
  std::copy(eig.values.begin(), eig.values.end(), out.begin());
}

inline double directed_hausdorff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (double x : a) {
    double best = std::numeric_limits<double>::infinity();
    for (double y : b) best = std::min(best, std::abs(x - y));
    worst = std::max(worst, best);
  }
  return worst;
}

inline double hausdorff(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), ErrorCode::EmptySet, "Hausdorff distance needs non-empty sets");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

inline double hausdorff(const Spectrum& a, const Spectrum& b) { return hausdorff(a.eigenvalues, b.eigenvalues); }

inline SymMatrix sample_sym_gaussian(std::size_t side, const GaussianMeasure& gamma, RngStream& stream) {
  require(gamma.dim() == packed_size(side), ErrorCode::DimensionMismatch,
          "measure on R^" + std::to_string(gamma.dim()) + " does not match side " + std::to_string(side));
  SymMatrix a(side);
  Vector z(gamma.dim());
  gamma.sample_into(stream, a.packed(), z);
  return a;
}

// Sorted spectra with a bucket grid on (min, max) eigenvalue for nearest
// queries under the Hausdorff metric. Any spectrum within Hausdorff
// distance d has min and max within d of the query's, so Chebyshev rings
// on that grid bound the search.
class SpectrumIndex {
 public:
  SpectrumIndex() = default;

  SpectrumIndex(std::size_t side, std::vector<double> spectra) : side_(side), spectra_(std::move(spectra)) {
    const std::size_t n = count();
    require(n > 0, ErrorCode::EmptySet, "empty spectrum cloud");
    lo_ = std::numeric_limits<double>::infinity();
    double hi = -lo_;
    for (double v : spectra_) {
      lo_ = std::min(lo_, v);
      hi = std::max(hi, v);
    }
    cells_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n) / 4.0)));
    width_ = std::max(hi - lo_, 1e-12) / static_cast<double>(cells_);
    std::vector<std::size_t> cell_of(n);
    offsets_.assign(cells_ * cells_ + 1, 0);
    for (std::size_t p = 0; p < n; ++p) {
      cell_of[p] = cell_id(clamp_cell(point(p).front()), clamp_cell(point(p).back()));
      ++offsets_[cell_of[p] + 1];
    }
    for (std::size_t c = 0; c < cells_ * cells_; ++c) offsets_[c + 1] += offsets_[c];
    order_.resize(n);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t p = 0; p < n; ++p) order_[fill[cell_of[p]]++] = p;
  }

  std::size_t side() const noexcept { return side_; }
  std::size_t count() const noexcept { return side_ == 0 ? 0 : spectra_.size() / side_; }
  std::span<const double> point(std::size_t p) const { return {spectra_.data() + p * side_, side_}; }
  const std::vector<double>& spectra() const noexcept { return spectra_; }

  // min over stored spectra S of hausdorff(query, S); query sorted ascending.
  double nearest(std::span<const double> query) const {
    require(count() > 0, ErrorCode::EmptySet, "empty spectrum cloud");
    const double qa = query.front();
    const double qb = query.back();
    const std::size_t ia = clamp_cell(qa);
    const std::size_t ib = clamp_cell(qb);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t ring = 0; ring <= cells_; ++ring) {
      const auto visit = [&](std::size_t i, std::size_t j) {
        const double lb = std::max(axis_gap(qa, i), axis_gap(qb, j));
        if (lb >= best) return;
        const std::size_t c = cell_id(i, j);
        for (std::size_t k = offsets_[c]; k < offsets_[c + 1]; ++k)
          best = std::min(best, hausdorff(query, point(order_[k])));
      };
      const auto lo_i = static_cast<std::ptrdiff_t>(ia) - static_cast<std::ptrdiff_t>(ring);
      const auto hi_i = static_cast<std::ptrdiff_t>(ia) + static_cast<std::ptrdiff_t>(ring);
      const auto lo_j = static_cast<std::ptrdiff_t>(ib) - static_cast<std::ptrdiff_t>(ring);
      const auto hi_j = static_cast<std::ptrdiff_t>(ib) + static_cast<std::ptrdiff_t>(ring);
      const auto n = static_cast<std::ptrdiff_t>(cells_);
      for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(lo_i, 0); i <= std::min(hi_i, n - 1); ++i)
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(lo_j, 0); j <= std::min(hi_j, n - 1); ++j) {
          if (i != lo_i && i != hi_i && j != lo_j && j != hi_j) continue;
          visit(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
      // Every cell in a later ring is at least ring * width away on some axis.
      if (static_cast<double>(ring) * width_ >= best) break;
    }
    return best;
  }

 private:
  std::size_t clamp_cell(double v) const {
    const double c = std::floor((v - lo_) / width_);
    if (!(c > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(c), cells_ - 1);
  }
  std::size_t cell_id(std::size_t i, std::size_t j) const { return i * cells_ + j; }
  // Distance from v to the slab of cell index i (edge cells extend to infinity).
  double axis_gap(double v, std::size_t i) const {
    const double a = i == 0 ? -std::numeric_limits<double>::infinity() : lo_ + static_cast<double>(i) * width_;
    const double b =
        i + 1 == cells_ ? std::numeric_limits<double>::infinity() : lo_ + static_cast<double>(i + 1) * width_;
    if (v < a) return a - v;
    if (v > b) return v - b;
    return 0.0;
  }

  std::size_t side_ = 0;
  std::vector<double> spectra_;
  double lo_ = 0.0;
  double width_ = 1.0;
  std::size_t cells_ = 1;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> order_;
};

struct ClusterOptions {
  std::size_t t_steps = 128;  // t = j / t_steps, j = 0..t_steps
  std::size_t probes = 4000;
  double stability_tolerance = 1e-2;
  double dedup_tolerance = 1e-6;
  std::uint64_t seed = kDefaultSphereSeed;
};

// Finite cloud of K = { sigma(A) : A in K_gamma } built from t * L u with u
// on a sphere sample and t on a uniform grid.
struct ClusterCloud {
  std::size_t side = 0;
  std::size_t resolution = 0;
  std::size_t t_steps = 0;
  double stability = 0.0;   // directed Hausdorff estimate from the doubled cloud to this one
  double max_radius = 0.0;  // largest spectral radius over the boundary sample
  std::vector<double> boundary;  // packed L u, one row of m(m+1)/2 per sphere point
  SpectrumIndex index;

  std::size_t size() const noexcept { return index.count(); }

  // Discretization allowance for distances measured against the cloud.
  double slack() const { return stability + max_radius / static_cast<double>(t_steps); }

  double distance(std::span<const double> sorted_spectrum) const { return index.nearest(sorted_spectrum); }
};

namespace detail {

// Sorted spectra of L u for sphere points [first, last).
inline std::vector<double> boundary_spectra(const GaussianMeasure& gamma, std::size_t side, std::size_t first,
                                            std::size_t last, std::uint64_t seed, std::vector<double>* packed_out) {
  const std::size_t d = gamma.dim();
  const SphereSequence seq(d, seed);
  Vector u(d), x(d);
  std::vector<double> out((last - first) * side);
  for (std::size_t i = first; i < last; ++i) {
    seq.point(i, u);
    lower_matvec(gamma.factor(), u, x);
    packed_spectrum(side, x, std::span<double>(out).subspan((i - first) * side, side));
    if (packed_out) packed_out->insert(packed_out->end(), x.begin(), x.end());
  }
  return out;
}

inline std::vector<double> scaled_cloud(std::span<const double> boundary, std::size_t side, std::size_t t_steps,
                                        double dedup) {
  const std::size_t n = boundary.size() / side;
  std::vector<std::vector<std::int64_t>> keys;
  keys.reserve(n * (t_steps + 1));
  for (std::size_t j = 0; j <= t_steps; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(t_steps);
    for (std::size_t p = 0; p < n; ++p) {
      std::vector<std::int64_t> key(side);
      for (std::size_t c = 0; c < side; ++c) key[c] = std::llround(t * boundary[p * side + c] / dedup);
      keys.push_back(std::move(key));
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::vector<double> out;
  out.reserve(keys.size() * side);
  for (const auto& key : keys)
    for (std::int64_t v : key) out.push_back(static_cast<double>(v) * dedup);
  return out;
}

}  // namespace detail

inline ClusterCloud cluster_set_K(const GaussianMeasure& gamma, std::size_t side, std::size_t resolution,
                                  const ClusterOptions& opt = {}) {
  require(side >= 1 && side <= kMaxClusterSide, ErrorCode::DimensionTooLarge, "cluster set supports side <= 8");
  require(gamma.dim() == packed_size(side), ErrorCode::DimensionMismatch, "measure does not match matrix side");
  require(resolution >= 2 && opt.t_steps >= 1, ErrorCode::ResolutionTooCoarse, "cluster resolution too small");
  ClusterCloud cloud;
  cloud.side = side;
  cloud.resolution = resolution;
  cloud.t_steps = opt.t_steps;
  auto spectra = detail::boundary_spectra(gamma, side, 0, resolution, opt.seed, &cloud.boundary);
  for (std::size_t p = 0; p < resolution; ++p)
    cloud.max_radius = std::max(
        {cloud.max_radius, std::abs(spectra[p * side]), std::abs(spectra[p * side + side - 1])});
  cloud.index = SpectrumIndex(side, detail::scaled_cloud(spectra, side, opt.t_steps, opt.dedup_tolerance));

  // The doubled cloud contains this one, so only its new points can be far.
  const auto extra = detail::boundary_spectra(gamma, side, resolution, 2 * resolution, opt.seed, nullptr);
  const std::size_t candidates = resolution * opt.t_steps;
  const std::size_t probes = std::min(opt.probes, candidates);
  Vector probe(side);
  for (std::size_t k = 0; k < probes; ++k) {
    const std::size_t flat = k * candidates / probes;
    const std::size_t p = flat % resolution;
    const double t = static_cast<double>(flat / resolution + 1) / static_cast<double>(opt.t_steps);
    for (std::size_t c = 0; c < side; ++c) probe[c] = t * extra[p * side + c];
    cloud.stability = std::max(cloud.stability, cloud.distance(probe));
  }
  require(cloud.stability <= opt.stability_tolerance, ErrorCode::ResolutionTooCoarse,
          "cluster cloud moves by " + std::to_string(cloud.stability) + " when the resolution doubles");
  return cloud;
}

struct SpectralOptions {
  std::size_t distance_resolution = 2000;  // sphere points for q-distance to K
  std::size_t cloud_resolution = 4096;
  ClusterOptions cloud;
};

struct SpectralCheckpoint {
  std::uint64_t n = 0;
  double radius_centered = 0.0;    // (i) max_{k<=n} r(A_k)/Gamma - sqrt(2 L n)
  double sum_centered = 0.0;       // (ii) max_{k<=n} r(S_k)/(sqrt(k) Gamma) - sqrt(2 LL n)
  double k_distance = 0.0;         // (iii) max over the window of q(A_k / sqrt(2 L k), K)
  double cluster_distance = 0.0;   // (iv) max over the window of d(sigma(A_k) / sqrt(2 L k), cloud)
};

struct SpectralTrial {
  std::vector<SpectralCheckpoint> rows;
  MaximaTrace radius_trace;
  std::size_t lipschitz_violations = 0;  // k with (iv) > 2 (iii) + slack
  double worst_lipschitz_margin = -std::numeric_limits<double>::infinity();  // max of (iv) - 2 (iii)
};

// Context shared by all trials of one run.
struct SpectralSetup {
  std::size_t side = 0;
  GaussianMeasure gamma;
  NormSpec norm;
  double big_gamma = 0.0;
  ClusterCloud cloud;
  SpectralOptions options;

  static SpectralSetup make(const GaussianMeasure& gamma, std::size_t side, const SpectralOptions& opt = {}) {
    require(gamma.dim() == packed_size(side), ErrorCode::DimensionMismatch, "measure does not match matrix side");
    SpectralSetup s{side, gamma, NormSpec::operator_sym(side), 0.0, {}, opt};
    s.big_gamma = dual_sigma(gamma, s.norm);
    s.cloud = cluster_set_K(gamma, side, opt.cloud_resolution, opt.cloud);
    return s;
  }
};

// One trial of the four diagnostics. Diagnostics (iii) and (iv) at a
// checkpoint take the maximum over k since the previous checkpoint; points
// of K give exact zeros for both.
inline SpectralTrial spectral_trial(const SpectralSetup& setup, std::span<const std::uint64_t> checkpoints,
                                    RngStream& stream) {
  validate_checkpoints(checkpoints, std::numeric_limits<std::uint64_t>::max());
  const std::size_t side = setup.side;
  const std::size_t d = packed_size(side);
  const double slack = setup.cloud.slack();
  MaximaRecorder radius_rec(checkpoints), sum_rec(checkpoints, Centering::LogLog);
  SpectralTrial out;
  Vector sum(d, 0.0), scaled(d), spec(side);
  double window_iii = 0.0, window_iv = 0.0;
  std::size_t next = 0;
  for (std::uint64_t k = 1; k <= checkpoints.back(); ++k) {
    const SymMatrix a = sample_sym_gaussian(side, setup.gamma, stream);
    const auto p = a.packed();
    radius_rec.push(spectral_radius(a) / setup.big_gamma);

    const double kd = static_cast<double>(k);
    const double root_k = std::sqrt(kd);
    for (std::size_t j = 0; j < d; ++j) {
      sum[j] += p[j];
      scaled[j] = sum[j] / root_k;
    }
    sum_rec.push(packed_spectral_radius(side, scaled) / setup.big_gamma);

    const double scale = sqrt_2l(kd);
    for (std::size_t j = 0; j < d; ++j) scaled[j] = p[j] / scale;
    if (rkhs_norm(setup.gamma, scaled) > 1.0) {
      const double iii =
          distance_to_K(setup.gamma, setup.norm, scaled, setup.options.distance_resolution, setup.options.cloud.seed)
              .distance;
      packed_spectrum(side, scaled, spec);
      const double iv = setup.cloud.distance(spec);
      window_iii = std::max(window_iii, iii);
      window_iv = std::max(window_iv, iv);
      out.worst_lipschitz_margin = std::max(out.worst_lipschitz_margin, iv - 2.0 * iii);
      if (iv > 2.0 * iii + slack) ++out.lipschitz_violations;
    }

    if (k == checkpoints[next]) {
      out.rows.push_back({k, 0.0, 0.0, window_iii, window_iv});
      window_iii = window_iv = 0.0;
      ++next;
    }
  }
  out.radius_trace = radius_rec.take();
  const auto& sums = sum_rec.trace();
  for (std::size_t c = 0; c < out.rows.size(); ++c) {
    out.rows[c].radius_centered = out.radius_trace.checkpoints[c].centered;
    out.rows[c].sum_centered = sums.checkpoints[c].centered;
  }
  return out;
}

struct SpectralSummaryRow {
  std::uint64_t n = 0;
  SummaryRow radius;
  SummaryRow sum;
  SummaryRow k_distance;
  SummaryRow cluster_distance;
};

struct SpectralReport {
  std::vector<SpectralSummaryRow> rows;
  std::size_t trials = 0;
  std::size_t lipschitz_violations = 0;
  double big_gamma = 0.0;
  double cloud_stability = 0.0;
  double cloud_slack = 0.0;
  std::size_t cloud_size = 0;
};

inline constexpr std::uint64_t kSpectralBootstrapTag = 0x5bec;

inline SpectralReport summarize_spectral(const SpectralSetup& setup, std::span<const SpectralTrial> trials,
                                         std::uint64_t seed) {
  require(!trials.empty(), ErrorCode::TooFewTrials, "spectral_strong_law needs at least one trial");
  SpectralReport rep;
  rep.trials = trials.size();
  rep.big_gamma = setup.big_gamma;
  rep.cloud_stability = setup.cloud.stability;
  rep.cloud_slack = setup.cloud.slack();
  rep.cloud_size = setup.cloud.size();
  const std::size_t rows = trials.front().rows.size();
  std::vector<double> a(trials.size()), b(trials.size()), c(trials.size()), e(trials.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < trials.size(); ++t) {
      const auto& row = trials[t].rows[r];
      a[t] = row.radius_centered;
      b[t] = row.sum_centered;
      c[t] = row.k_distance;
      e[t] = row.cluster_distance;
    }
    const auto boot = [&](std::uint64_t which) { return RngStream(seed, r * 4 + which, kSpectralBootstrapTag); };
    rep.rows.push_back({trials.front().rows[r].n, summarize(a, boot(0)), summarize(b, boot(1)),
                        summarize(c, boot(2)), summarize(e, boot(3))});
  }
  for (const auto& t : trials) rep.lipschitz_violations += t.lipschitz_violations;
  return rep;
}

// Sequential driver: trial t uses derive_stream(seed, t).
inline SpectralReport spectral_strong_law(const GaussianMeasure& gamma, std::size_t side,
                                          std::span<const std::uint64_t> checkpoints, std::size_t trials,
                                          std::uint64_t seed, const SpectralOptions& opt = {}) {
  require(trials >= 1, ErrorCode::TooFewTrials, "spectral_strong_law needs at least one trial");
  validate_checkpoints(checkpoints, std::numeric_limits<std::uint64_t>::max());
  const auto setup = SpectralSetup::make(gamma, side, opt);
  std::vector<SpectralTrial> results;
  results.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    auto stream = derive_stream(seed, t);
    results.push_back(spectral_trial(setup, checkpoints, stream));
  }
  return summarize_spectral(setup, results, seed);
}

}  // namespace gauss_extrema
