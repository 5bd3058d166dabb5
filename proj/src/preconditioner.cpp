#include "dfpi/preconditioner.hpp"

#include <cmath>

#include "dfpi/vector_ops.hpp"

namespace dfpi {

namespace {

// Relative pivot threshold against the 2-norm of the original row.
constexpr double pivot_tol = 1e-14;

std::string row_message(const char* what, std::size_t row) {
  return std::string(what) + " at row " + std::to_string(row + 1);
}

}  // namespace

const char* to_string(PrecondKind k) {
  switch (k) {
    case PrecondKind::identity: return "identity";
    case PrecondKind::jacobi: return "jacobi";
    case PrecondKind::ilu0: return "ilu0";
    case PrecondKind::milu: return "milu";
  }
  return "?";
}

PrecondKind parse_precond_kind(const std::string& s) {
  if (s == "identity") return PrecondKind::identity;
  if (s == "jacobi") return PrecondKind::jacobi;
  if (s == "ilu0") return PrecondKind::ilu0;
  if (s == "milu") return PrecondKind::milu;
  throw std::invalid_argument("unknown preconditioner '" + s + "'");
}

PivotError::PivotError(std::size_t row, const std::string& what)
    : std::runtime_error(what), row_(row) {}

Preconditioner Preconditioner::identity(std::size_t n) {
  Preconditioner p;
  p.kind_ = PrecondKind::identity;
  p.n_ = n;
  return p;
}

Preconditioner Preconditioner::jacobi(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("jacobi: matrix is not square");
  Preconditioner p;
  p.kind_ = PrecondKind::jacobi;
  p.n_ = a.rows();
  p.inv_diag_ = a.diagonal();
  for (std::size_t i = 0; i < p.n_; ++i) {
    if (p.inv_diag_[i] == 0.0) throw PivotError(i, row_message("jacobi: zero diagonal", i));
    p.inv_diag_[i] = 1.0 / p.inv_diag_[i];
  }
  return p;
}

Preconditioner Preconditioner::ilu0(const SparseMatrix& a, bool modified) {
  if (a.rows() != a.cols()) throw std::invalid_argument("ilu0: matrix is not square");
  const std::size_t n = a.rows();
  const auto off = a.row_offsets();
  const auto col = a.col_indices();
  std::vector<double> v(a.values().begin(), a.values().end());

  std::vector<std::size_t> diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = a.find(i, i);
    if (!d) throw PivotError(i, row_message("ilu0: structurally zero diagonal", i));
    diag[i] = *d;
  }

  // where[j] = position of (i, j) in the current row i, or npos.
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> where(n, npos);
  for (std::size_t i = 0; i < n; ++i) {
    double row_norm = 0.0;
    for (std::size_t p = off[i]; p < off[i + 1]; ++p) {
      where[col[p]] = p;
      row_norm += v[p] * v[p];
    }
    row_norm = std::sqrt(row_norm);

    for (std::size_t p = off[i]; p < diag[i]; ++p) {
      const std::size_t k = col[p];
      v[p] /= v[diag[k]];
      const double lik = v[p];
      for (std::size_t q = diag[k] + 1; q < off[k + 1]; ++q) {
        const std::size_t j = col[q];
        if (where[j] != npos)
          v[where[j]] -= lik * v[q];
        else if (modified)
          v[diag[i]] -= lik * v[q];
      }
    }
    if (std::abs(v[diag[i]]) < pivot_tol * row_norm || !std::isfinite(v[diag[i]]))
      throw PivotError(i, row_message(modified ? "milu: zero pivot" : "ilu0: zero pivot", i));
    for (std::size_t p = off[i]; p < off[i + 1]; ++p) where[col[p]] = npos;
  }

  Preconditioner pc;
  pc.kind_ = modified ? PrecondKind::milu : PrecondKind::ilu0;
  pc.n_ = n;
  pc.lu_ = SparseMatrix(n, n, {off.begin(), off.end()}, {col.begin(), col.end()}, std::move(v));
  pc.diag_pos_ = std::move(diag);
  return pc;
}

Preconditioner Preconditioner::build(PrecondKind kind, const SparseMatrix& a) {
  switch (kind) {
    case PrecondKind::identity: return identity(a.rows());
    case PrecondKind::jacobi: return jacobi(a);
    case PrecondKind::ilu0: return ilu0(a, false);
    case PrecondKind::milu: return ilu0(a, true);
  }
  throw std::invalid_argument("unknown preconditioner kind");
}

Vector Preconditioner::apply(std::span<const double> r) const {
  require_same_size(r.size(), n_, "preconditioner apply");
  Vector z(r.begin(), r.end());
  switch (kind_) {
    case PrecondKind::identity: return z;
    case PrecondKind::jacobi:
      for (std::size_t i = 0; i < n_; ++i) z[i] *= inv_diag_[i];
      return z;
    default: break;
  }
  const auto off = lu_.row_offsets();
  const auto col = lu_.col_indices();
  const auto val = lu_.values();
  for (std::size_t i = 0; i < n_; ++i) {
    double s = z[i];
    for (std::size_t p = off[i]; p < diag_pos_[i]; ++p) s -= val[p] * z[col[p]];
    z[i] = s;
  }
  for (std::size_t i = n_; i-- > 0;) {
    double s = z[i];
    for (std::size_t p = diag_pos_[i] + 1; p < off[i + 1]; ++p) s -= val[p] * z[col[p]];
    z[i] = s / val[diag_pos_[i]];
  }
  return z;
}

Vector Preconditioner::apply_transpose(std::span<const double> r) const {
  require_same_size(r.size(), n_, "preconditioner apply_transpose");
  if (kind_ == PrecondKind::identity || kind_ == PrecondKind::jacobi) return apply(r);
  const auto off = lu_.row_offsets();
  const auto col = lu_.col_indices();
  const auto val = lu_.values();
  Vector w(r.begin(), r.end());
  // U^T w = r, walking U by rows.
  for (std::size_t i = 0; i < n_; ++i) {
    w[i] /= val[diag_pos_[i]];
    for (std::size_t p = diag_pos_[i] + 1; p < off[i + 1]; ++p) w[col[p]] -= val[p] * w[i];
  }
  // L^T z = w
  for (std::size_t i = n_; i-- > 0;)
    for (std::size_t p = off[i]; p < diag_pos_[i]; ++p) w[col[p]] -= val[p] * w[i];
  return w;
}

Vector Preconditioner::multiply(std::span<const double> x) const {
  require_same_size(x.size(), n_, "preconditioner multiply");
  Vector y(x.begin(), x.end());
  switch (kind_) {
    case PrecondKind::identity: return y;
    case PrecondKind::jacobi:
      for (std::size_t i = 0; i < n_; ++i) y[i] /= inv_diag_[i];
      return y;
    default: break;
  }
  const auto off = lu_.row_offsets();
  const auto col = lu_.col_indices();
  const auto val = lu_.values();
  Vector u(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t p = diag_pos_[i]; p < off[i + 1]; ++p) u[i] += val[p] * x[col[p]];
  for (std::size_t i = 0; i < n_; ++i) {
    double s = u[i];
    for (std::size_t p = off[i]; p < diag_pos_[i]; ++p) s += val[p] * u[col[p]];
    y[i] = s;
  }
  return y;
}

DenseMatrix preconditioned_operator(const Preconditioner& p, const DenseMatrix& a) {
  DenseMatrix out(a.rows(), a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) out.set_column(j, p.apply(a.column(j)));
  return out;
}

}  // namespace dfpi
