#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dfpi/dense_matrix.hpp"

namespace dfpi {

/// Pivots below this fraction of the largest |R_kk| count as zero.
inline constexpr double small_factor_rank_tol = 1e-12;

/// Householder QR with column pivoting of the M x M core matrix G = Y^T A Z.
class SmallFactor {
 public:
  SmallFactor() = default;
  explicit SmallFactor(const DenseMatrix& g);

  std::size_t size() const noexcept { return qr_.rows(); }
  std::size_t rank() const noexcept { return rank_; }
  bool deficient() const noexcept { return rank_ < size(); }
  /// Original column indices in pivot order.
  std::span<const std::size_t> pivots() const noexcept { return perm_; }
  /// |R_kk| in pivot order.
  std::vector<double> pivot_magnitudes() const;

  /// Solves G x = rhs. Throws std::domain_error when G is rank deficient.
  Vector solve(std::span<const double> rhs) const;
  /// Minimum-norm least-squares solution; valid for any rank.
  Vector solve_min_norm(std::span<const double> rhs) const;

 private:
  Vector apply_qt(std::span<const double> rhs) const;

  DenseMatrix qr_;  // R above the diagonal, Householder vectors below
  std::vector<double> tau_;
  std::vector<std::size_t> perm_;
  std::size_t rank_ = 0;
};

SmallFactor factor_small(const DenseMatrix& g);

enum class Fallback { none, min_norm_least_squares };

/// Solve with the factor; a deficient factor requires an explicit fallback.
Vector solve_small(const SmallFactor& f, std::span<const double> rhs,
                   Fallback fallback = Fallback::none);

}  // namespace dfpi
