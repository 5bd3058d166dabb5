#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "dfpi/preconditioner.hpp"
#include "dfpi/recruitment.hpp"
#include "dfpi/sparse_matrix.hpp"
#include "dfpi/trace.hpp"
#include "dfpi/trouble_space.hpp"

namespace dfpi {

/// Where the projection on the trouble space happens within a step.
///   pre_projection    x+ = x + Q_R e,  x' = x+ + P^-1 A (Id - Q_R) e
///   final_correction  x' = x + P^-1 A (Id - Q_R) e, Q_R part added on exit
///   post_projection   x+ = x + P^-1 A e,  x' = x+ + Q_R (x_inf - x+)
///   init_projection   project x0 once, then x' = x + (Id - Q_R) P^-1 A e
/// with e = x_inf - x the current error.
enum class DfpiVariant { pre_projection, final_correction, post_projection, init_projection };

const char* to_string(DfpiVariant v);

struct SolverOptions {
  std::size_t max_iter = 1000;
  double rel_tol = 1e-8;  // on ||b - A x|| / ||b||
  DfpiVariant variant = DfpiVariant::pre_projection;
  bool record_halves = true;  // skipped while the trouble space is empty
  bool keep_history = false;

  void validate() const;
};

/// x + P^-1 (b - A x)
Vector richardson_step(const SparseMatrix& a, std::span<const double> b, const Preconditioner& p,
                       std::span<const double> x);

struct DfpiStep {
  std::optional<Vector> x_half;
  Vector x;
};

/// One step of the chosen variant with A and P taken from ts. For
/// init_projection the caller is responsible for the initial projection and
/// for final_correction `x` is the uncorrected inner iterate.
DfpiStep dfpi_step(const TroubleSpace& ts, std::span<const double> b, std::span<const double> x,
                   DfpiVariant variant);

/// x + Q_R (x_inf - x), used to start init_projection and to finish
/// final_correction.
Vector project_iterate(const TroubleSpace& ts, std::span<const double> b,
                       std::span<const double> x);

/// Iterates with a fixed trouble space (ts must be built on a and p).
SolveResult dfpi_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                       const Preconditioner& p, const TroubleSpace& ts, const SolverOptions& opts);

/// Iterates while `recruiter` grows ts from the increments x^(k) - x^(k-1).
/// Only pre_projection is supported with dynamic recruitment.
SolveResult dfpi_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                       const Preconditioner& p, TroubleSpace& ts, Recruiter& recruiter,
                       const SolverOptions& opts);

/// Dense N = Q_R + P^-1 A (Id - Q_R) and the error propagator Id - N.
struct IterationMatrix {
  DenseMatrix n;
  DenseMatrix id_minus_n;
};

IterationMatrix build_iteration_matrix_N(const DenseMatrix& a, const Preconditioner& p,
                                         const TroubleSpace& ts);

struct NonsingularityReport {
  bool ok = false;
  bool invariant = false;          // condition (i): P^-1 A Z within Z
  bool core_nonsingular = false;   // condition (ii): Y^T P Z nonsingular
  double invariance_defect = 0.0;  // ||(Id - Pi_Z) P^-1 A Z||_2
  double core_sigma_ratio = 0.0;   // sigma_min / sigma_max of Y^T P Z
  Vector witness;                  // kernel vector of Y^T P Z when singular
};

NonsingularityReport check_N_nonsingular(const DenseMatrix& a, const Preconditioner& p,
                                         const TroubleSpace& ts);

}  // namespace dfpi
