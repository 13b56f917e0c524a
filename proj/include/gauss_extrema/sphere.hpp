#pragma once

// Deterministic quasi-uniform points on the Euclidean unit sphere S^{d-1}.
//
// d = 1: alternating +1, -1.
// d = 2: golden-angle sequence on the circle.
// d >= 3: Kronecker sequence with the generalised golden ratio (Roberts'
//         R_d), pushed through the normal quantile and normalised.
// Every sequence is nested: the first N points at resolution 2N are the N
// points at resolution N. The seed only shifts the sequence.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "gauss_extrema/linalg.hpp"
#include "gauss_extrema/rng.hpp"
#include "gauss_extrema/special.hpp"

namespace gauss_extrema {

inline constexpr std::uint64_t kDefaultSphereSeed = 0x5eed5eed12345678ULL;

class SphereSequence {
 public:
  explicit SphereSequence(std::size_t dim, std::uint64_t seed = kDefaultSphereSeed)
      : dim_(dim), alpha_(dim), offset_(dim) {
    require(dim > 0, ErrorCode::DimensionMismatch, "sphere dimension must be positive");
    // phi_d solves x^{d+1} = x + 1.
    double phi = 2.0;
    for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / static_cast<double>(dim + 1));
    for (std::size_t j = 0; j < dim; ++j) {
      alpha_[j] = std::fmod(std::pow(1.0 / phi, static_cast<double>(j + 1)), 1.0);
      offset_[j] = static_cast<double>(splitmix64(seed + j) >> 11) * 0x1.0p-53;
    }
  }

  std::size_t dim() const noexcept { return dim_; }

  void point(std::size_t i, std::span<double> out) const {
    if (dim_ == 1) {
      out[0] = (i % 2 == 0) ? 1.0 : -1.0;
      return;
    }
    if (dim_ == 2) {
      const double frac = std::fmod(offset_[0] + static_cast<double>(i) * kInvGolden, 1.0);
      const double angle = 2.0 * std::numbers::pi * frac;
      out[0] = std::cos(angle);
      out[1] = std::sin(angle);
      return;
    }
    double ss = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      double frac = std::fmod(offset_[j] + (static_cast<double>(i) + 0.5) * alpha_[j], 1.0);
      frac = std::clamp(frac, 1e-15, 1.0 - 1e-15);
      out[j] = normal_quantile(frac);
      ss += out[j] * out[j];
    }
    const double inv = 1.0 / std::sqrt(ss);
    for (double& v : out) v *= inv;
  }

  // The first n points as an n x dim matrix.
  Matrix points(std::size_t n) const {
    Matrix pts(n, dim_);
    for (std::size_t i = 0; i < n; ++i) point(i, pts.row(i));
    return pts;
  }

 private:
  static constexpr double kInvGolden = 0.6180339887498948482;
  std::size_t dim_;
  Vector alpha_;
  Vector offset_;
};

}  // namespace gauss_extrema
