#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "dfpi/preconditioner.hpp"
#include "dfpi/sparse_matrix.hpp"
#include "dfpi/trace.hpp"

namespace dfpi {

struct KrylovOptions {
  std::size_t max_iter = 1000;
  double rel_tol = 1e-8;  // on ||b - A x|| / ||b||
  std::optional<std::size_t> restart;  // GMRES(n); unrestarted when empty
  bool keep_history = false;

  void validate() const;
};

/// Left-preconditioned GMRES: Arnoldi with MGS on P^-1 A, Givens rotations
/// on the Hessenberg least-squares problem. The iterate is rebuilt every
/// step and the trace holds the true residual ||b - A x_k||.
SolveResult gmres_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                        const Preconditioner& p, const KrylovOptions& opts);

/// Preconditioned CG. Throws std::invalid_argument when A is not symmetric
/// (||A - A^T||_F > 1e-10 ||A||_F) or P^-1 fails a random symmetry probe.
SolveResult cg_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                     const Preconditioner& p, const KrylovOptions& opts);

/// Preconditioned BiCG with shadow residual r0. A vanishing rho or pivot
/// ends the solve with status breakdown and the step in the message.
SolveResult bicg_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                       const Preconditioner& p, const KrylovOptions& opts);

/// Right-preconditioned BiCGStab. Each iteration leaves two records: the
/// BiCG half (k + 0.5) and the GMRES(1) smoothing step (k + 1).
SolveResult bicgstab_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                           const Preconditioner& p, const KrylovOptions& opts);

/// x <- x + P^-1 (b - A x). A residual that ends above its starting value
/// is noted in the trace message.
SolveResult richardson_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                             const Preconditioner& p, const KrylovOptions& opts);

}  // namespace dfpi
