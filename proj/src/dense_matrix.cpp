#include "dfpi/dense_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dfpi/kernels.hpp"
#include "dfpi/vector_ops.hpp"

namespace dfpi {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("DenseMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> d) {
  DenseMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

DenseMatrix DenseMatrix::from_columns(std::span<const Vector> columns) {
  if (columns.empty()) return {};
  DenseMatrix m(columns.front().size(), columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) m.set_column(j, columns[j]);
  return m;
}

Vector DenseMatrix::column(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

void DenseMatrix::set_column(std::size_t j, std::span<const double> values) {
  require_same_size(values.size(), rows_, "DenseMatrix::set_column");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

std::vector<Vector> DenseMatrix::columns() const {
  std::vector<Vector> out;
  out.reserve(cols_);
  for (std::size_t j = 0; j < cols_; ++j) out.push_back(column(j));
  return out;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double DenseMatrix::frobenius_norm() const { return kernels::norm2(data_); }

bool DenseMatrix::all_finite() const { return dfpi::all_finite(data_); }

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_size(a.cols(), b.rows(), "DenseMatrix product");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_size(a.rows(), b.rows(), "DenseMatrix sum");
  require_same_size(a.cols(), b.cols(), "DenseMatrix sum");
  DenseMatrix c = a;
  kernels::axpy(1.0, b.data(), c.data());
  return c;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_size(a.rows(), b.rows(), "DenseMatrix difference");
  require_same_size(a.cols(), b.cols(), "DenseMatrix difference");
  DenseMatrix c = a;
  kernels::axpy(-1.0, b.data(), c.data());
  return c;
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
  DenseMatrix c = a;
  kernels::scale(s, c.data());
  return c;
}

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  require_same_size(a.cols(), x.size(), "matvec");
  Vector y(a.rows());
  kernels::dense_matvec(a.rows(), a.cols(), a.data(), x, y);
  return y;
}

Vector transpose_matvec(const DenseMatrix& a, std::span<const double> x) {
  require_same_size(a.rows(), x.size(), "transpose_matvec");
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) kernels::axpy(x[i], a.row(i), y);
  return y;
}

}  // namespace dfpi
