#pragma once

#include <span>
#include <vector>

#include "dfpi/dense_matrix.hpp"

namespace dfpi {

/// LU with partial pivoting for verification-scale square matrices.
class DenseLU {
 public:
  /// Throws std::runtime_error if a pivot is exactly zero.
  explicit DenseLU(DenseMatrix a);

  Vector solve(std::span<const double> rhs) const;
  /// Solves A^T x = rhs.
  Vector solve_transpose(std::span<const double> rhs) const;
  DenseMatrix inverse() const;
  std::size_t size() const noexcept { return lu_.rows(); }

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
};

DenseMatrix inverse(const DenseMatrix& a);
/// Solves A X = B column by column.
DenseMatrix solve(const DenseMatrix& a, const DenseMatrix& b);

struct SvdResult {
  std::vector<double> values;  // descending
  DenseMatrix u;               // m x k
  DenseMatrix v;               // n x k, k = min(m, n)
};

/// One-sided Jacobi SVD.
SvdResult svd(const DenseMatrix& a);
std::vector<double> singular_values(const DenseMatrix& a);
double spectral_norm(const DenseMatrix& a);
/// sigma_max / sigma_min; +inf for singular input.
double condition_number_2(const DenseMatrix& a);

}  // namespace dfpi
