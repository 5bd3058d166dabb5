#pragma once

// Literal transcriptions of two classical stabilized fixed-point schemes,
// written against plain vectors and the textbook eliminator so they share
// no projection code with the library.
//
// BoostConv: x+ = x + P^-1 xi1, xi1 = xi0 + rho, rho = r - A P^-1 xi0,
// xi0 = argmin over span(U) of ||r - A P^-1 xi||, with U = P (increments).
//
// RPM (linear, one Newton step): x = xh + xt with xh in Z, xt orthogonal
// to Z. The Z part solves O[P^-1 (b - A (xt + xh+))] = 0; the complement
// takes (Id - O) of a Richardson step, from the old xh (additive) or the
// new one (multiplicative).

#include <cmath>
#include <vector>

#include "dfpi/dense_matrix.hpp"
#include "dfpi/preconditioner.hpp"
#include "dfpi/sparse_matrix.hpp"
#include "dense_solve.hpp"
#include "krylov_basis.hpp"

namespace dfpi::oracles {

inline Vector vsub(const Vector& x, const Vector& y) {
  Vector z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - y[i];
  return z;
}

inline Vector vadd(const Vector& x, const Vector& y) {
  Vector z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] + y[i];
  return z;
}

// Least squares min ||B c - r|| through classical Gram-Schmidt (two passes)
// on the columns of B, then back substitution.
inline std::vector<double> cgs_least_squares(const std::vector<Vector>& cols, const Vector& r) {
  const std::size_t k = cols.size();
  std::vector<Vector> q;
  std::vector<std::vector<double>> rr(k, std::vector<double>(k, 0.0));
  for (std::size_t j = 0; j < k; ++j) {
    Vector v = cols[j];
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double c = plain_dot(q[i], v);
        rr[i][j] += c;
        for (std::size_t t = 0; t < v.size(); ++t) v[t] -= c * q[i][t];
      }
    }
    const double nv = std::sqrt(plain_dot(v, v));
    rr[j][j] = nv;
    for (auto& x : v) x /= nv;
    q.push_back(v);
  }
  std::vector<double> g(k), c(k);
  for (std::size_t i = 0; i < k; ++i) g[i] = plain_dot(q[i], r);
  for (std::size_t i = k; i-- > 0;) {
    double acc = g[i];
    for (std::size_t j = i + 1; j < k; ++j) acc -= rr[i][j] * c[j];
    c[i] = acc / rr[i][i];
  }
  return c;
}

/// Iterates x^(0..steps) of the literal BoostConv recurrence with U grown
/// by P (x^(k) - x^(k-1)) after every step.
inline std::vector<Vector> boostconv_literal(const SparseMatrix& a, const Vector& b, const Vector& x0,
                                             const Preconditioner& p, std::size_t steps) {
  std::vector<Vector> xs{x0};
  std::vector<Vector> u;
  Vector x = x0;
  for (std::size_t n = 0; n < steps; ++n) {
    const Vector r = vsub(b, matvec(a, x));
    Vector xi0(x.size(), 0.0);
    if (!u.empty()) {
      std::vector<Vector> cols;
      for (const auto& ui : u) cols.push_back(matvec(a, p.apply(ui)));
      const auto c = cgs_least_squares(cols, r);
      for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t t = 0; t < x.size(); ++t) xi0[t] += c[i] * u[i][t];
    }
    const Vector rho = vsub(r, matvec(a, p.apply(xi0)));
    const Vector xi1 = vadd(xi0, rho);
    const Vector xn = vadd(x, p.apply(xi1));
    u.push_back(p.multiply(vsub(xn, x)));
    x = xn;
    xs.push_back(x);
  }
  return xs;
}

/// Iterates of linear RPM with orthonormal basis z of the deflated space.
inline std::vector<Vector> rpm(const SparseMatrix& a, const Vector& b, const Vector& x0,
                               const Preconditioner& p, const std::vector<Vector>& z,
                               std::size_t steps, bool multiplicative) {
  const std::size_t m = z.size();
  const auto ortho = [&](const Vector& v) {  // O v
    Vector out(v.size(), 0.0);
    for (const auto& zi : z) {
      const double c = plain_dot(zi, v);
      for (std::size_t t = 0; t < v.size(); ++t) out[t] += c * zi[t];
    }
    return out;
  };
  const auto fixed_point = [&](const Vector& x) { return vadd(x, p.apply(vsub(b, matvec(a, x)))); };
  DenseMatrix core(m, m);
  for (std::size_t j = 0; j < m; ++j) {
    const Vector col = p.apply(matvec(a, z[j]));
    for (std::size_t i = 0; i < m; ++i) core(i, j) = plain_dot(z[i], col);
  }
  Vector xh = ortho(x0);
  Vector xt = vsub(x0, xh);
  std::vector<Vector> xs{x0};
  for (std::size_t n = 0; n < steps; ++n) {
    const Vector g = p.apply(vsub(b, matvec(a, xt)));
    Vector rhs(m);
    for (std::size_t i = 0; i < m; ++i) rhs[i] = plain_dot(z[i], g);
    const Vector y = gauss_solve(core, rhs);
    Vector xh_next(x0.size(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t t = 0; t < x0.size(); ++t) xh_next[t] += y[i] * z[i][t];
    const Vector f = fixed_point(vadd(multiplicative ? xh_next : xh, xt));
    xt = vsub(f, ortho(f));
    xh = xh_next;
    xs.push_back(vadd(xh, xt));
  }
  return xs;
}

}  // namespace dfpi::oracles
