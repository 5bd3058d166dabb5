#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

#include "dfpi/sparse_matrix.hpp"

namespace dfpi {

enum class PrecondKind { identity, jacobi, ilu0, milu };

const char* to_string(PrecondKind k);
/// Accepts "identity", "jacobi", "ilu0", "milu".
PrecondKind parse_precond_kind(const std::string& s);

/// Raised when a diagonal entry or pivot vanishes. row() is zero-based; the
/// message names the one-based row.
class PivotError : public std::runtime_error {
 public:
  PivotError(std::size_t row, const std::string& what);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// z = P^{-1} r for P in {Id, diag(A), ILU(0), MILU}. Immutable after build.
class Preconditioner {
 public:
  Preconditioner() = default;

  static Preconditioner identity(std::size_t n);
  static Preconditioner jacobi(const SparseMatrix& a);
  /// Incomplete LU on the pattern of A. With modified=true the fill that
  /// falls outside the pattern is subtracted from the diagonal, so LU and A
  /// have equal row sums.
  static Preconditioner ilu0(const SparseMatrix& a, bool modified = false);
  static Preconditioner build(PrecondKind kind, const SparseMatrix& a);

  PrecondKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return n_; }

  /// P^{-1} r
  Vector apply(std::span<const double> r) const;
  /// P^{-T} r
  Vector apply_transpose(std::span<const double> r) const;
  /// P r
  Vector multiply(std::span<const double> x) const;

  /// L (unit lower, diagonal omitted) and U packed in A's pattern; only
  /// meaningful for ilu0/milu.
  const SparseMatrix& factors() const noexcept { return lu_; }

 private:
  PrecondKind kind_ = PrecondKind::identity;
  std::size_t n_ = 0;
  Vector inv_diag_;
  SparseMatrix lu_;
  std::vector<std::size_t> diag_pos_;
};

/// P^{-1} A as a dense matrix, column by column. Verification scale only.
DenseMatrix preconditioned_operator(const Preconditioner& p, const DenseMatrix& a);

}  // namespace dfpi
