#include "dfpi/dense_decomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dfpi/vector_ops.hpp"

namespace dfpi {

DenseLU::DenseLU(DenseMatrix a) : lu_(std::move(a)) {
  if (!lu_.square()) throw std::invalid_argument("DenseLU: matrix not square");
  const std::size_t n = lu_.rows();
  perm_.resize(n);
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu_(i, k)) > std::abs(lu_(p, k))) p = i;
    if (lu_(p, k) == 0.0)
      throw std::runtime_error("DenseLU: singular matrix at column " + std::to_string(k));
    if (p != k) {
      std::swap_ranges(lu_.row(p).begin(), lu_.row(p).end(), lu_.row(k).begin());
      std::swap(perm_[p], perm_[k]);
    }
    const double pivot = lu_(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = lu_(i, k) / pivot;
      lu_(i, k) = l;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
    }
  }
}

Vector DenseLU::solve(std::span<const double> rhs) const {
  const std::size_t n = size();
  require_same_size(rhs.size(), n, "DenseLU::solve");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rhs[perm_[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
    x[i] /= lu_(i, i);
  }
  return x;
}

Vector DenseLU::solve_transpose(std::span<const double> rhs) const {
  // A = P^T L U  =>  A^T = U^T L^T P
  const std::size_t n = size();
  require_same_size(rhs.size(), n, "DenseLU::solve_transpose");
  Vector y(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) y[i] -= lu_(j, i) * y[j];
    y[i] /= lu_(i, i);
  }
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = i + 1; j < n; ++j) y[i] -= lu_(j, i) * y[j];
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[perm_[i]] = y[i];
  return x;
}

DenseMatrix DenseLU::inverse() const {
  const std::size_t n = size();
  DenseMatrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    inv.set_column(j, solve(e));
    e[j] = 0.0;
  }
  return inv;
}

DenseMatrix inverse(const DenseMatrix& a) { return DenseLU(a).inverse(); }

DenseMatrix solve(const DenseMatrix& a, const DenseMatrix& b) {
  const DenseLU lu(a);
  DenseMatrix x(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) x.set_column(j, lu.solve(b.column(j)));
  return x;
}

namespace {

// Hestenes one-sided Jacobi on a tall matrix (m >= n).
SvdResult svd_tall(const DenseMatrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<Vector> cols = a.columns();
  DenseMatrix v = DenseMatrix::identity(n);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += cols[p][i] * cols[p][i];
          beta += cols[q][i] * cols[q][i];
          gamma += cols[p][i] * cols[q][i];
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double xp = cols[p][i], xq = cols[q][i];
          cols[p][i] = c * xp - s * xq;
          cols[q][i] = s * xp + c * xq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sv(n);
  for (std::size_t j = 0; j < n; ++j) sv[j] = norm2(cols[j]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sv[x] > sv[y]; });
  SvdResult out{std::vector<double>(n), DenseMatrix(m, n), DenseMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.values[k] = sv[j];
    for (std::size_t i = 0; i < m; ++i) out.u(i, k) = sv[j] > 0.0 ? cols[j][i] / sv[j] : 0.0;
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = v(i, j);
  }
  return out;
}

}  // namespace

SvdResult svd(const DenseMatrix& a) {
  if (a.rows() >= a.cols()) return svd_tall(a);
  SvdResult t = svd_tall(a.transposed());
  return {std::move(t.values), std::move(t.v), std::move(t.u)};
}

std::vector<double> singular_values(const DenseMatrix& a) { return svd(a).values; }

double spectral_norm(const DenseMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  return singular_values(a).front();
}

double condition_number_2(const DenseMatrix& a) {
  const auto s = singular_values(a);
  if (s.empty()) return 1.0;
  if (s.back() == 0.0) return std::numeric_limits<double>::infinity();
  return s.front() / s.back();
}

}  // namespace dfpi
