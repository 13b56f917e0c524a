#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "gauss_extrema/error.hpp"
#include "gauss_extrema/linalg.hpp"
#include "gauss_extrema/packed.hpp"

namespace gauss_extrema {

enum class NormKind { L1, L2, Linf, SupGrid, OperatorSym };

constexpr std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::L1: return "l1";
    case NormKind::L2: return "l2";
    case NormKind::Linf: return "linf";
    case NormKind::SupGrid: return "sup-grid";
    case NormKind::OperatorSym: return "operator-sym";
  }
  return "unknown";
}

inline NormKind parse_norm_kind(std::string_view s) {
  if (s == "l1") return NormKind::L1;
  if (s == "l2") return NormKind::L2;
  if (s == "linf") return NormKind::Linf;
  if (s == "sup-grid") return NormKind::SupGrid;
  if (s == "operator-sym") return NormKind::OperatorSym;
  throw Error(ErrorCode::ConfigError, "unknown norm kind '" + std::string(s) + "'");
}

// Spectral radius of a symmetric matrix given in packed form. Closed form
// for sides 1 and 2; Jacobi otherwise.
inline double packed_spectral_radius(std::size_t side, std::span<const double> packed) {
  if (side == 1) return std::abs(packed[0]);
  if (side == 2) {
    const double mean = 0.5 * (packed[0] + packed[2]);
    const double half_gap = 0.5 * (packed[0] - packed[2]);
    return std::abs(mean) + std::hypot(half_gap, packed[1]);
  }
  const auto eig = jacobi_eigen(unpack_symmetric(side, packed));
  return std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
}

// A norm on R^d. SupGrid(g) is the sup norm of a scalar path sampled at g
// grid points; OperatorSym(m) is the operator norm of the mirrored packed
// upper triangle, so d = m(m+1)/2.
class NormSpec {
 public:
  static NormSpec l1(std::size_t dim) { return NormSpec(NormKind::L1, dim, 0); }
  static NormSpec l2(std::size_t dim) { return NormSpec(NormKind::L2, dim, 0); }
  static NormSpec linf(std::size_t dim) { return NormSpec(NormKind::Linf, dim, 0); }
  static NormSpec sup_grid(std::size_t grid_size) { return NormSpec(NormKind::SupGrid, grid_size, grid_size); }
  static NormSpec operator_sym(std::size_t side) { return NormSpec(NormKind::OperatorSym, packed_size(side), side); }

  static NormSpec make(NormKind kind, std::size_t dim) {
    switch (kind) {
      case NormKind::L1: return l1(dim);
      case NormKind::L2: return l2(dim);
      case NormKind::Linf: return linf(dim);
      case NormKind::SupGrid: return sup_grid(dim);
      case NormKind::OperatorSym: {
        const std::size_t side = side_from_packed(dim);
        require(side > 0, ErrorCode::DimensionMismatch,
                "operator-sym needs dimension m(m+1)/2, got " + std::to_string(dim));
        return operator_sym(side);
      }
    }
    throw Error(ErrorCode::ConfigError, "bad norm kind");
  }

  NormKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  // Grid size for SupGrid, matrix side for OperatorSym, 0 otherwise.
  std::size_t parameter() const noexcept { return param_; }
  double divisor() const noexcept { return divisor_; }

  // The norm x -> q(x) / divisor; its dual is f -> divisor * q*(f).
  NormSpec scaled(double divisor) const {
    require(divisor > 0.0, ErrorCode::NonPositiveInput, "norm divisor must be positive");
    NormSpec out = *this;
    out.divisor_ *= divisor;
    return out;
  }

  double operator()(std::span<const double> x) const { return raw(x) / divisor_; }
  double dual(std::span<const double> f) const { return raw_dual(f) * divisor_; }

  // The norm before division by divisor().
  double raw(std::span<const double> x) const {
    check(x);
    switch (kind_) {
      case NormKind::L1: {
        double s = 0.0;
        for (double v : x) s += std::abs(v);
        return s;
      }
      case NormKind::L2: return norm2(x);
      case NormKind::Linf:
      case NormKind::SupGrid: {
        double m = 0.0;
        for (double v : x) m = std::max(m, std::abs(v));
        return m;
      }
      case NormKind::OperatorSym: return packed_spectral_radius(param_, x);
    }
    return 0.0;
  }

  // sup { f . x : raw(x) <= 1 }.
  double raw_dual(std::span<const double> f) const {
    check(f);
    switch (kind_) {
      case NormKind::L1: {
        double m = 0.0;
        for (double v : f) m = std::max(m, std::abs(v));
        return m;
      }
      case NormKind::L2: return norm2(f);
      case NormKind::Linf:
      case NormKind::SupGrid: {
        double s = 0.0;
        for (double v : f) s += std::abs(v);
        return s;
      }
      case NormKind::OperatorSym: {
        // Trace norm of the matrix that represents f under the Frobenius pairing.
        const auto eig = jacobi_eigen(functional_matrix(param_, f));
        double s = 0.0;
        for (double v : eig.values) s += std::abs(v);
        return s;
      }
    }
    return 0.0;
  }

  bool operator==(const NormSpec&) const = default;

 private:
  NormSpec(NormKind kind, std::size_t dim, std::size_t param) : kind_(kind), dim_(dim), param_(param) {
    require(dim > 0, ErrorCode::DimensionMismatch, "norm dimension must be positive");
  }

  void check(std::span<const double> x) const {
    require(x.size() == dim_, ErrorCode::DimensionMismatch,
            "vector of size " + std::to_string(x.size()) + " for norm on R^" + std::to_string(dim_));
  }

  NormKind kind_;
  std::size_t dim_;
  std::size_t param_;
  double divisor_ = 1.0;
};

}  // namespace gauss_extrema
