#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dfpi/dense_matrix.hpp"

namespace dfpi {

inline constexpr double default_drop_tol = 1e-10;

struct OrthonormalizeResult {
  std::vector<Vector> basis;
  std::vector<std::size_t> dropped;  // input indices found dependent
};

/// Modified Gram-Schmidt with one re-orthogonalization pass. Input k is
/// dropped when its remainder has norm <= drop_tol * (its original norm);
/// zero inputs are always dropped.
OrthonormalizeResult mgs_orthonormalize(std::span<const Vector> vectors,
                                        double drop_tol = default_drop_tol);

struct Remainder {
  Vector vector;               // v minus its projection on the basis
  std::vector<double> coeffs;  // accumulated projection coefficients
  double norm = 0.0;
};

/// Two MGS sweeps of v against an orthonormal basis.
Remainder orthogonalize_against(std::span<const Vector> basis, std::span<const double> v);

/// Orthonormal basis of span(vectors) as matrix columns, dependent inputs removed.
DenseMatrix orthonormal_columns(std::span<const Vector> vectors,
                                double drop_tol = default_drop_tol);

/// Cosines of the principal angles between span(a) and span(b) (both
/// orthonormalized first), in descending order. Their count is min(dim a, dim b).
std::vector<double> principal_angle_cosines(std::span<const Vector> a, std::span<const Vector> b);

/// Largest principal angle (radians) between the spans; +inf when the
/// dimensions differ.
double max_principal_angle(std::span<const Vector> a, std::span<const Vector> b);

/// ||(Id - Pi_span(b)) v|| / ||v|| maximized over the columns v of an
/// orthonormal basis of span(a): the sine of the largest angle from span(a)
/// into span(b). Zero iff span(a) is contained in span(b).
double containment_gap(std::span<const Vector> a, std::span<const Vector> b);

}  // namespace dfpi
