#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

#include "cpt/error.hpp"

namespace cpt {

template <std::size_t N>
using Vector = std::array<double, N>;

template <std::size_t N>
using Matrix = std::array<std::array<double, N>, N>;

/// Gaussian elimination with partial pivoting on a small dense system.
/// Throws SingularSystem when a pivot falls below n*eps times the largest
/// entry of the input matrix.
template <std::size_t N>
Vector<N> solve_dense(Matrix<N> a, Vector<N> b) {
  double scale = 0.0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::abs(v));
  const double tiny = static_cast<double>(N) *
                      std::numeric_limits<double>::epsilon() * scale;
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw Error(ErrorKind::SingularSystem, "matrix is zero or non-finite");

  for (std::size_t col = 0; col < N; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) <= tiny)
      throw Error(ErrorKind::SingularSystem,
                  "pivot below threshold in column " + std::to_string(col));
    if (pivot != col) {
      std::swap(a[pivot], a[col]);
      std::swap(b[pivot], b[col]);
    }
    for (std::size_t r = col + 1; r < N; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      a[r][col] = 0.0;
      for (std::size_t c = col + 1; c < N; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }

  Vector<N> x{};
  for (std::size_t i = N; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < N; ++c) acc -= a[i][c] * x[c];
    x[i] = acc / a[i][i];
  }
  return x;
}

}  // namespace cpt
