#include "dfpi/small_factor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dfpi/vector_ops.hpp"

namespace dfpi {

namespace {

// In-place Householder reduction of column k below the diagonal. Returns tau;
// on exit a(k,k) holds the R entry and a(k+1.., k) the vector tail (head 1).
double householder_column(DenseMatrix& a, std::size_t k) {
  const std::size_t m = a.rows();
  double sigma = 0.0;
  for (std::size_t i = k + 1; i < m; ++i) sigma += a(i, k) * a(i, k);
  const double x0 = a(k, k);
  if (sigma == 0.0) return 0.0;
  const double norm = std::sqrt(x0 * x0 + sigma);
  const double beta = x0 <= 0.0 ? norm : -norm;
  const double v0 = x0 - beta;
  for (std::size_t i = k + 1; i < m; ++i) a(i, k) /= v0;
  a(k, k) = beta;
  return (beta - x0) / beta;
}

void apply_reflector(DenseMatrix& a, std::size_t k, double tau, std::size_t first_col) {
  if (tau == 0.0) return;
  const std::size_t m = a.rows();
  for (std::size_t j = first_col; j < a.cols(); ++j) {
    double s = a(k, j);
    for (std::size_t i = k + 1; i < m; ++i) s += a(i, k) * a(i, j);
    s *= tau;
    a(k, j) -= s;
    for (std::size_t i = k + 1; i < m; ++i) a(i, j) -= s * a(i, k);
  }
}

}  // namespace

SmallFactor::SmallFactor(const DenseMatrix& g) : qr_(g) {
  if (!g.square()) throw std::invalid_argument("SmallFactor: matrix not square");
  const std::size_t m = g.rows();
  tau_.assign(m, 0.0);
  perm_.resize(m);
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t best = k;
    double best_norm = -1.0;
    for (std::size_t j = k; j < m; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += qr_(i, j) * qr_(i, j);
      if (s > best_norm) {
        best_norm = s;
        best = j;
      }
    }
    if (best != k) {
      for (std::size_t i = 0; i < m; ++i) std::swap(qr_(i, k), qr_(i, best));
      std::swap(perm_[k], perm_[best]);
    }
    tau_[k] = householder_column(qr_, k);
    apply_reflector(qr_, k, tau_[k], k + 1);
  }
  const double lead = m ? std::abs(qr_(0, 0)) : 0.0;
  rank_ = 0;
  for (std::size_t k = 0; k < m; ++k)
    if (lead > 0.0 && std::abs(qr_(k, k)) > small_factor_rank_tol * lead) ++rank_;
    else break;
}

std::vector<double> SmallFactor::pivot_magnitudes() const {
  std::vector<double> d(size());
  for (std::size_t k = 0; k < size(); ++k) d[k] = std::abs(qr_(k, k));
  return d;
}

Vector SmallFactor::apply_qt(std::span<const double> rhs) const {
  const std::size_t m = size();
  require_same_size(rhs.size(), m, "SmallFactor::solve");
  Vector y(rhs.begin(), rhs.end());
  for (std::size_t k = 0; k < m; ++k) {
    if (tau_[k] == 0.0) continue;
    double s = y[k];
    for (std::size_t i = k + 1; i < m; ++i) s += qr_(i, k) * y[i];
    s *= tau_[k];
    y[k] -= s;
    for (std::size_t i = k + 1; i < m; ++i) y[i] -= s * qr_(i, k);
  }
  return y;
}

Vector SmallFactor::solve(std::span<const double> rhs) const {
  if (deficient()) throw std::domain_error("SmallFactor::solve: rank-deficient core matrix");
  const std::size_t m = size();
  Vector y = apply_qt(rhs);
  for (std::size_t k = m; k-- > 0;) {
    for (std::size_t j = k + 1; j < m; ++j) y[k] -= qr_(k, j) * y[j];
    y[k] /= qr_(k, k);
  }
  Vector x(m);
  for (std::size_t k = 0; k < m; ++k) x[perm_[k]] = y[k];
  return x;
}

Vector SmallFactor::solve_min_norm(std::span<const double> rhs) const {
  const std::size_t m = size();
  const std::size_t r = rank_;
  if (r == m) return solve(rhs);
  const Vector c = apply_qt(rhs);
  Vector x(m, 0.0);
  if (r == 0) return x;
  // T = [R11 R12] (r x m). Factor T^T = U S, then w = U S^{-T} c.
  DenseMatrix tt(m, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = i; j < m; ++j) tt(j, i) = qr_(i, j);
  std::vector<double> tau(r);
  for (std::size_t k = 0; k < r; ++k) {
    tau[k] = householder_column(tt, k);
    apply_reflector(tt, k, tau[k], k + 1);
  }
  Vector y(m, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    double s = c[i];
    for (std::size_t j = 0; j < i; ++j) s -= tt(j, i) * y[j];
    y[i] = s / tt(i, i);
  }
  // w = U y = H_0 ... H_{r-1} [y; 0]
  for (std::size_t k = r; k-- > 0;) {
    if (tau[k] == 0.0) continue;
    double s = y[k];
    for (std::size_t i = k + 1; i < m; ++i) s += tt(i, k) * y[i];
    s *= tau[k];
    y[k] -= s;
    for (std::size_t i = k + 1; i < m; ++i) y[i] -= s * tt(i, k);
  }
  for (std::size_t k = 0; k < m; ++k) x[perm_[k]] = y[k];
  return x;
}

SmallFactor factor_small(const DenseMatrix& g) { return SmallFactor(g); }

Vector solve_small(const SmallFactor& f, std::span<const double> rhs, Fallback fallback) {
  if (f.deficient() && fallback == Fallback::min_norm_least_squares) return f.solve_min_norm(rhs);
  return f.solve(rhs);
}

}  // namespace dfpi
