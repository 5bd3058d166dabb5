#pragma once

// Textbook Gaussian elimination with partial pivoting, kept apart from the
// library's LU and QR code paths.

#include <cmath>
#include <utility>

#include "dfpi/dense_matrix.hpp"

namespace dfpi::oracles {

inline Vector gauss_solve(DenseMatrix a, Vector b) {
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

/// Inverse by solving against each unit vector.
inline DenseMatrix gauss_inverse(const DenseMatrix& a) {
  const std::size_t n = a.rows();
  DenseMatrix inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    Vector e(n, 0.0);
    e[j] = 1.0;
    const Vector c = gauss_solve(a, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = c[i];
  }
  return inv;
}

}  // namespace dfpi::oracles
