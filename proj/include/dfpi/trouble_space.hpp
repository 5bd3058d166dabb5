#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfpi/orthogonalize.hpp"
#include "dfpi/preconditioner.hpp"
#include "dfpi/small_factor.hpp"
#include "dfpi/sparse_matrix.hpp"

namespace dfpi {

/// Test space of the oblique projector Q_R = Z (Y^T A Z)^{-1} Y^T A.
///   galerkin: Y = Z
///   lsq_a:    Y = A Z        (Q_R e minimizes ||A(e - Q_R e)||)
///   lsq_pa:   Y = P^-T P^-1 A Z   (minimizes ||P^-1 A(e - Q_R e)||)
enum class ProjectionMode { galerkin, lsq_a, lsq_pa };

const char* to_string(ProjectionMode m);
/// Accepts "galerkin", "lsq-a"/"lsq_a", "lsq-pa"/"lsq_pa".
ProjectionMode parse_projection_mode(const std::string& s);

struct TroubleEvent {
  enum class Kind { appended, dropped_dependent, removed_deficient, dropped_oldest };
  Kind kind;
  std::size_t size_after;
};

const char* to_string(TroubleEvent::Kind k);

/// The trouble space Z with everything needed to apply Q_R from a residual.
///
/// Z is kept orthonormal and W = A Z is cached, so applying Q_R to an error e
/// only needs the residual r = A e. The raw recruited vectors are retained so
/// that dropping the oldest one can rebuild the basis from the survivors.
///
/// A and P are held by reference and must outlive the space.
class TroubleSpace {
 public:
  TroubleSpace(const SparseMatrix& a, const Preconditioner& p, ProjectionMode mode,
               std::optional<std::size_t> capacity = std::nullopt,
               double drop_tol = default_drop_tol);

  /// Appends each vector in turn; dependent or deficient ones are logged and skipped.
  static TroubleSpace build(std::span<const Vector> vectors, ProjectionMode mode,
                            const SparseMatrix& a, const Preconditioner& p,
                            std::optional<std::size_t> capacity = std::nullopt);

  std::size_t size() const noexcept { return z_.size(); }
  bool empty() const noexcept { return z_.empty(); }
  std::size_t dim() const noexcept { return a_->rows(); }
  ProjectionMode mode() const noexcept { return mode_; }
  std::optional<std::size_t> capacity() const noexcept { return capacity_; }
  const SparseMatrix& matrix() const noexcept { return *a_; }
  const Preconditioner& preconditioner() const noexcept { return *p_; }

  std::span<const Vector> basis() const noexcept { return z_; }
  std::span<const Vector> images() const noexcept { return w_; }
  std::span<const Vector> raw() const noexcept { return raw_; }
  std::span<const TroubleEvent> events() const noexcept { return events_; }

  /// Y, formed on demand.
  std::vector<Vector> test_basis() const;
  /// Y^T A Z, formed on demand.
  DenseMatrix core_matrix() const;

  /// alpha with Q_R e = Z alpha, where r = A e.
  Vector coefficients(std::span<const double> r) const;
  Vector combine_basis(std::span<const double> alpha) const;   // Z alpha
  Vector combine_images(std::span<const double> alpha) const;  // W alpha

  /// Q_R e given r = A e.
  Vector apply_QR_error(std::span<const double> r) const;
  /// (Id - Q_R) e given e and r = A e.
  Vector apply_Id_minus_QR(std::span<const double> e, std::span<const double> r) const;
  /// Q_R u for a known vector u (costs one matvec).
  Vector apply_QR(std::span<const double> u) const;

  /// Returns false when z adds no new direction (logged). Throws
  /// std::length_error when the space is at capacity.
  bool append(std::span<const double> z);
  /// Removes the first recruited direction and rebuilds from the rest.
  void drop_oldest();
  void clear();

 private:
  bool try_add(std::span<const double> z, bool log_events);
  void rebuild(std::vector<Vector> raw);

  const SparseMatrix* a_;
  const Preconditioner* p_;
  ProjectionMode mode_;
  std::optional<std::size_t> capacity_;
  double drop_tol_;

  std::vector<Vector> raw_;
  std::vector<Vector> z_;
  std::vector<Vector> w_;
  // galerkin: factor of Z^T W.
  SmallFactor galerkin_;
  // lsq modes: thin QR of Wt = W (lsq_a) or P^-1 W (lsq_pa); Y^T A Z = R^T R.
  std::vector<Vector> q_;
  DenseMatrix r_;
  std::vector<TroubleEvent> events_;
};

/// Dense N x N matrix of Q_R formed as Z (Y^T A Z)^{-1} Y^T A from the
/// space's basis and test basis. Verification scale only.
DenseMatrix explicit_projector(const TroubleSpace& ts, const DenseMatrix& a);

}  // namespace dfpi
