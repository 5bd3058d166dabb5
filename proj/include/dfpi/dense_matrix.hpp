#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace dfpi {

using Vector = std::vector<double>;

/// Row-major real matrix used for verification-scale operators
/// (explicit P^-1 A, iteration matrices, small projected problems).
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> d);
  /// Columns must share a common length.
  static DenseMatrix from_columns(std::span<const Vector> columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Vector column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);
  std::vector<Vector> columns() const;

  DenseMatrix transposed() const;
  double frobenius_norm() const;
  bool all_finite() const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);

Vector matvec(const DenseMatrix& a, std::span<const double> x);
Vector transpose_matvec(const DenseMatrix& a, std::span<const double> x);

}  // namespace dfpi
