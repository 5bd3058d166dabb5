#pragma once

// Orthonormal Krylov basis by plain Arnoldi with classical Gram-Schmidt run
// twice. Uses only std and DenseMatrix storage, none of the library's
// orthogonalization code.

#include <cmath>
#include <functional>
#include <vector>

#include "dfpi/dense_matrix.hpp"

namespace dfpi::oracles {

using Op = std::function<Vector(const Vector&)>;

inline double plain_dot(const Vector& x, const Vector& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

/// span{v, op v, ..., op^(n-1) v}; stops early if the space becomes invariant.
inline std::vector<Vector> krylov_basis(const Op& op, Vector v, std::size_t n) {
  std::vector<Vector> q;
  for (std::size_t k = 0; k < n; ++k) {
    const double orig = std::sqrt(plain_dot(v, v));
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<double> c(q.size());
      for (std::size_t j = 0; j < q.size(); ++j) c[j] = plain_dot(q[j], v);
      for (std::size_t j = 0; j < q.size(); ++j)
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c[j] * q[j][i];
    }
    const double nv = std::sqrt(plain_dot(v, v));
    if (nv <= 1e-13 * orig) break;
    for (auto& x : v) x /= nv;
    q.push_back(v);
    v = op(q.back());
  }
  return q;
}

}  // namespace dfpi::oracles
