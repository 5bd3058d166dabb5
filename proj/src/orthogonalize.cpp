#include "dfpi/orthogonalize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dfpi/dense_decomp.hpp"
#include "dfpi/kernels.hpp"
#include "dfpi/vector_ops.hpp"

namespace dfpi {

Remainder orthogonalize_against(std::span<const Vector> basis, std::span<const double> v) {
  Remainder r;
  r.vector.assign(v.begin(), v.end());
  r.coeffs.assign(basis.size(), 0.0);
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const double c = kernels::dot(basis[i], r.vector);
      kernels::axpy(-c, basis[i], r.vector);
      r.coeffs[i] += c;
    }
  }
  r.norm = kernels::norm2(r.vector);
  return r;
}

OrthonormalizeResult mgs_orthonormalize(std::span<const Vector> vectors, double drop_tol) {
  OrthonormalizeResult out;
  if (vectors.empty()) return out;
  const std::size_t n = vectors.front().size();
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    require_same_size(vectors[k].size(), n, "mgs_orthonormalize");
    const double original = kernels::norm2(vectors[k]);
    if (original == 0.0 || !std::isfinite(original)) {
      out.dropped.push_back(k);
      continue;
    }
    Remainder r = orthogonalize_against(out.basis, vectors[k]);
    if (r.norm <= drop_tol * original) {
      out.dropped.push_back(k);
      continue;
    }
    kernels::scale(1.0 / r.norm, r.vector);
    out.basis.push_back(std::move(r.vector));
  }
  return out;
}

DenseMatrix orthonormal_columns(std::span<const Vector> vectors, double drop_tol) {
  const auto q = mgs_orthonormalize(vectors, drop_tol);
  if (q.basis.empty()) return DenseMatrix(vectors.empty() ? 0 : vectors.front().size(), 0);
  return DenseMatrix::from_columns(q.basis);
}

namespace {

// Matrix whose columns are (Id - Pi_b) q for q in an orthonormal basis of a.
DenseMatrix complement_components(std::span<const Vector> a, std::span<const Vector> b) {
  const auto qa = mgs_orthonormalize(a).basis;
  const auto qb = mgs_orthonormalize(b).basis;
  std::vector<Vector> cols;
  cols.reserve(qa.size());
  for (const auto& q : qa) cols.push_back(orthogonalize_against(qb, q).vector);
  if (cols.empty()) return {};
  return DenseMatrix::from_columns(cols);
}

}  // namespace

std::vector<double> principal_angle_cosines(std::span<const Vector> a, std::span<const Vector> b) {
  const auto qa = mgs_orthonormalize(a).basis;
  const auto qb = mgs_orthonormalize(b).basis;
  if (qa.empty() || qb.empty()) return {};
  DenseMatrix c(qa.size(), qb.size());
  for (std::size_t i = 0; i < qa.size(); ++i)
    for (std::size_t j = 0; j < qb.size(); ++j) c(i, j) = kernels::dot(qa[i], qb[j]);
  auto s = singular_values(c);
  for (double& v : s) v = std::min(v, 1.0);
  return s;
}

double containment_gap(std::span<const Vector> a, std::span<const Vector> b) {
  const DenseMatrix d = complement_components(a, b);
  if (d.cols() == 0) return 0.0;
  return std::min(1.0, spectral_norm(d));
}

double max_principal_angle(std::span<const Vector> a, std::span<const Vector> b) {
  const auto da = mgs_orthonormalize(a).basis.size();
  const auto db = mgs_orthonormalize(b).basis.size();
  if (da != db) return std::numeric_limits<double>::infinity();
  return std::asin(containment_gap(a, b));
}

}  // namespace dfpi
