#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dfpi/eigen.hpp"
#include "dfpi/preconditioner.hpp"
#include "dfpi/problems.hpp"
#include "dfpi/trouble_space.hpp"

namespace dfpi {

/// The three production projection modes plus the orthogonal projector
/// (Y = A^-T Z), which needs an explicit inverse and exists only here.
enum class VerifyMode { galerkin, lsq_a, lsq_pa, orthogonal };

const char* to_string(VerifyMode m);

/// Dense Q_R for span(z) in the given mode.
DenseMatrix dense_projector(const DenseMatrix& a, const Preconditioner& p,
                            std::span<const Vector> z, VerifyMode mode);
/// Dense N = Q_R + P^-1 A (Id - Q_R).
DenseMatrix dense_iteration_matrix(const DenseMatrix& a, const Preconditioner& p,
                                   std::span<const Vector> z, VerifyMode mode);

/// Real basis of the invariant subspace of m spanned by the eigenvectors of
/// the `count` eigenvalues farthest from 1 (so the modes of Id - m with the
/// largest modulus). A conjugate pair straddling the cut is taken whole.
std::vector<Vector> dominant_invariant_subspace(const DenseMatrix& m, std::size_t count);

/// ||(Id - Pi_Z) P^-1 A Q||_2 over an orthonormal basis Q of span(z).
double invariance_measure(const DenseMatrix& a, const Preconditioner& p,
                          std::span<const Vector> z);

inline constexpr double invariance_threshold = 1e-10;
inline constexpr double spectrum_match_tol = 1e-7;

struct SpectralReport {
  Spectrum spectrum_m;          // P^-1 A
  Spectrum spectrum_n;          // N
  Spectrum spectrum_id_minus_n;
  Spectrum predicted_id_minus_n;  // {0}^m and the non-deflated part of Id - P^-1 A
  std::size_t deflated_count = 0;
  double max_nondeflated_modulus = 0.0;
  double invariance_defect = 0.0;
  bool nonsingular_i = false;   // invariance
  bool nonsingular_ii = false;  // Y^T P Z nonsingular (production modes only)
  double hausdorff = 0.0;       // between predicted and computed Sp(Id - N)
  double matching = 0.0;        // multiset version
  bool checked = false;         // identity asserted only when Z is invariant
  bool pass = false;
};

SpectralReport spectrum_comparison(const DenseMatrix& a, const Preconditioner& p,
                                   std::span<const Vector> z, VerifyMode mode);

struct BauerFikeReport {
  bool diagonalizable = false;
  double lambda = 0.0;        // largest non-deflated modulus of Sp(Id - N_T)
  double kappa = 0.0;         // cond2 of the eigenvector matrix of N_T
  double delta_n_norm = 0.0;  // ||N - N_T||_2
  double bound = 0.0;         // lambda + kappa ||dN||
  double observed_rho = 0.0;  // rho(Id - N)
  double max_drift = 0.0;     // max over Sp(N) of the distance to Sp(N_T)
  bool drift_ok = false;      // max_drift <= kappa ||dN|| (+1e-9)
  bool rho_ok = false;        // observed_rho <= bound (+1e-9)
  bool premise = false;       // 1 - lambda > kappa ||dN||
  double rho_n = 0.0;         // rho(N) itself, unit eigenvalues included
  bool raw_reading_holds = false;  // rho(N) <= lambda_N + kappa ||dN||
  std::string note;
};

/// z_exact must span a P^-1 A invariant subspace; N_T is built from it and N
/// from z_exact + deltas. The eigenvector matrix of N_T is assembled from
/// the eigenvectors of P^-1 A (see the implementation) rather than from a
/// numerical eigensolve of N_T, whose unit eigenvalue is repeated.
BauerFikeReport bauer_fike_check(const DenseMatrix& a, const Preconditioner& p,
                                 std::span<const Vector> z_exact, std::span<const Vector> deltas,
                                 VerifyMode mode);

struct ChainResidual {
  std::size_t block;
  std::size_t index;
  bool in_z;
  double residual;  // relative
};

struct JordanChainReport {
  std::vector<ChainResidual> residuals;
  double max_residual = 0.0;
  Spectrum spectrum_n;
  Spectrum predicted_n;
  double spectrum_distance = 0.0;
  bool pass = false;
};

inline constexpr double chain_tol = 1e-8;

/// Builds M = V J V^-1 (A = M, P = Id), deflates the first prefix[i] chain
/// vectors of block i, and checks the generalized eigenvectors of N built
/// from the chains of M. Throws std::invalid_argument for a unit eigenvalue
/// with a deflated prefix, where that construction divides by zero.
JordanChainReport jordan_chain_check(const JordanSpec& spec,
                                     std::span<const std::size_t> prefix, VerifyMode mode);

}  // namespace dfpi
