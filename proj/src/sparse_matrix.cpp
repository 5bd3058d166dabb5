#include "dfpi/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dfpi/kernels.hpp"
#include "dfpi/vector_ops.hpp"

namespace dfpi {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                           std::vector<std::size_t> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (row_offsets_.size() != rows_ + 1 || row_offsets_.front() != 0)
    throw std::invalid_argument("SparseMatrix: row_offsets must have rows+1 entries starting at 0");
  if (col_indices_.size() != values_.size() || row_offsets_.back() != values_.size())
    throw std::invalid_argument("SparseMatrix: offsets/indices/values sizes disagree");
  for (std::size_t i = 0; i < rows_; ++i) {
    if (row_offsets_[i + 1] < row_offsets_[i])
      throw std::invalid_argument("SparseMatrix: row_offsets not monotone at row " +
                                  std::to_string(i));
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (col_indices_[k] >= cols_)
        throw std::invalid_argument("SparseMatrix: column index out of range in row " +
                                    std::to_string(i));
      if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1])
        throw std::invalid_argument("SparseMatrix: column indices not strictly ascending in row " +
                                    std::to_string(i));
    }
  }
  if (!all_finite(values_)) throw std::invalid_argument("SparseMatrix: non-finite value");
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> entries) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<std::size_t> idx;
  std::vector<double> val;
  idx.reserve(entries.size());
  val.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    if (e.row >= rows || e.col >= cols)
      throw std::invalid_argument("SparseMatrix::from_triplets: index out of range");
    if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
      val.back() += e.value;
      continue;
    }
    idx.push_back(e.col);
    val.push_back(e.value);
    ++offsets[e.row + 1];
  }
  for (std::size_t i = 0; i < rows; ++i) offsets[i + 1] += offsets[i];
  return {rows, cols, std::move(offsets), std::move(idx), std::move(val)};
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& a) {
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> idx;
  std::vector<double> val;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0 || (i == j && a.square())) {
        idx.push_back(j);
        val.push_back(a(i, j));
      }
    }
    offsets.push_back(idx.size());
  }
  return {a.rows(), a.cols(), std::move(offsets), std::move(idx), std::move(val)};
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> offsets(n + 1), idx(n);
  for (std::size_t i = 0; i <= n; ++i) offsets[i] = i;
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return {n, n, std::move(offsets), std::move(idx), std::vector<double>(n, 1.0)};
}

std::optional<std::size_t> SparseMatrix::find(std::size_t i, std::size_t j) const {
  const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
  const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return std::nullopt;
  return static_cast<std::size_t>(it - col_indices_.begin());
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto k = find(i, j);
  return k ? values_[*k] : 0.0;
}

Vector SparseMatrix::diagonal() const {
  Vector d(std::min(rows_, cols_), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
  return d;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<std::size_t> offsets(cols_ + 1, 0);
  for (std::size_t c : col_indices_) ++offsets[c + 1];
  for (std::size_t j = 0; j < cols_; ++j) offsets[j + 1] += offsets[j];
  std::vector<std::size_t> next(offsets.begin(), offsets.end() - 1);
  std::vector<std::size_t> idx(nnz());
  std::vector<double> val(nnz());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const std::size_t pos = next[col_indices_[k]]++;
      idx[pos] = i;
      val[pos] = values_[k];
    }
  return {cols_, rows_, std::move(offsets), std::move(idx), std::move(val)};
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      d(i, col_indices_[k]) = values_[k];
  return d;
}

double SparseMatrix::frobenius_norm() const { return kernels::norm2(values_); }

double SparseMatrix::asymmetry() const {
  if (rows_ != cols_) throw std::invalid_argument("asymmetry: matrix not square");
  double s = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const double d = values_[k] - at(col_indices_[k], i);
      s += d * d;
    }
  // Entries present only in the transpose pattern are covered from the other side.
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      if (!find(col_indices_[k], i)) s += values_[k] * values_[k];
  return std::sqrt(s);
}

Vector matvec(const SparseMatrix& a, std::span<const double> x) {
  require_same_size(a.cols(), x.size(), "matvec");
  Vector y(a.rows());
  kernels::csr_matvec(a.rows(), a.row_offsets(), a.col_indices(), a.values(), x, y);
  return y;
}

Vector transpose_matvec(const SparseMatrix& a, std::span<const double> x) {
  require_same_size(a.rows(), x.size(), "transpose_matvec");
  Vector y(a.cols());
  kernels::csr_transpose_matvec(a.rows(), a.row_offsets(), a.col_indices(), a.values(), x, y);
  return y;
}

}  // namespace dfpi
