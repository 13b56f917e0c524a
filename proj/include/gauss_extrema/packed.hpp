#pragma once

// Packed storage of symmetric matrices: the upper triangle, row by row,
// each off-diagonal entry stored once.

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>

#include "gauss_extrema/linalg.hpp"

namespace gauss_extrema {

constexpr std::size_t packed_size(std::size_t side) { return side * (side + 1) / 2; }

// Side m with m(m+1)/2 == n, or 0 when n is not triangular.
inline std::size_t side_from_packed(std::size_t n) {
  std::size_t m = static_cast<std::size_t>((std::sqrt(8.0 * static_cast<double>(n) + 1.0) - 1.0) / 2.0);
  while (packed_size(m) < n) ++m;
  while (m > 0 && packed_size(m) > n) --m;
  return packed_size(m) == n ? m : 0;
}

constexpr std::size_t packed_index(std::size_t side, std::size_t i, std::size_t j) {
  if (i > j) {
    const std::size_t t = i;
    i = j;
    j = t;
  }
  return i * side - i * (i - 1) / 2 + (j - i);
}

inline Matrix unpack_symmetric(std::size_t side, std::span<const double> packed) {
  assert(packed.size() == packed_size(side));
  Matrix a(side, side);
  std::size_t k = 0;
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = i; j < side; ++j, ++k) a(i, j) = a(j, i) = packed[k];
  return a;
}

// Symmetric matrix F whose Frobenius pairing with the mirrored matrix of x
// equals the plain dot product f . x.
inline Matrix functional_matrix(std::size_t side, std::span<const double> f) {
  assert(f.size() == packed_size(side));
  Matrix a(side, side);
  std::size_t k = 0;
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = i; j < side; ++j, ++k) {
      if (i == j)
        a(i, i) = f[k];
      else
        a(i, j) = a(j, i) = 0.5 * f[k];
    }
  return a;
}

// Packed functional of the rank-one form A -> u^T A u.
inline Vector rank_one_functional(std::span<const double> u) {
  const std::size_t m = u.size();
  Vector g(packed_size(m));
  std::size_t k = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j, ++k) g[k] = (i == j ? 1.0 : 2.0) * u[i] * u[j];
  return g;
}

}  // namespace gauss_extrema
