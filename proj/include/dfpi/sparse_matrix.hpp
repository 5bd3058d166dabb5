#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dfpi/dense_matrix.hpp"

namespace dfpi {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed-row matrix. Column indices are strictly ascending within a row;
/// explicit zeros are allowed.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  /// Validates the layout; throws std::invalid_argument on violation.
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
               std::vector<std::size_t> col_indices, std::vector<double> values);

  /// Duplicates are summed.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> entries);
  /// Keeps every nonzero plus the full diagonal of square matrices.
  static SparseMatrix from_dense(const DenseMatrix& a);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const std::size_t> col_indices() const noexcept { return col_indices_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Position of (i, j) in values(), if stored.
  std::optional<std::size_t> find(std::size_t i, std::size_t j) const;
  double at(std::size_t i, std::size_t j) const;
  Vector diagonal() const;

  SparseMatrix transposed() const;
  DenseMatrix to_dense() const;
  double frobenius_norm() const;
  /// ||A - A^T||_F
  double asymmetry() const;

  bool operator==(const SparseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

Vector matvec(const SparseMatrix& a, std::span<const double> x);
Vector transpose_matvec(const SparseMatrix& a, std::span<const double> x);

}  // namespace dfpi
