#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "dfpi/dense_matrix.hpp"

namespace dfpi {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;
using Spectrum = std::vector<Complex>;

inline constexpr std::size_t dense_eig_max_dim = 300;
/// Eigenpairs with ||Av - lambda v|| above this multiple of ||A||_F ||v||
/// are reported as not converged.
inline constexpr double eig_residual_tol = 1e-8;

struct Eigendecomposition {
  Spectrum values;
  std::vector<ComplexVector> vectors;  // unit 2-norm; empty unless requested
  std::vector<bool> converged;

  bool all_converged() const;
};

/// Unsymmetric real eigensolver: Householder reduction to Hessenberg form,
/// then shifted double-step QR to real Schur form and back-substitution for
/// the eigenvectors. Throws std::invalid_argument for non-square input or
/// dimension above dense_eig_max_dim.
Eigendecomposition dense_eig(const DenseMatrix& a, bool want_vectors = false);

/// Sorted by real part, then imaginary part.
Spectrum sorted_spectrum(Spectrum s);
double spectral_radius(std::span<const Complex> s);
/// Symmetric Hausdorff distance between two point sets.
double hausdorff_distance(std::span<const Complex> a, std::span<const Complex> b);
/// Multiset matching: each entry of `a` is paired greedily (closest pair
/// first) with a distinct entry of `b`; returns the largest paired distance,
/// or +inf when the sizes differ.
double matching_distance(std::span<const Complex> a, std::span<const Complex> b);
/// Removes from `from` the entries matched greedily to `remove`; returns the rest.
Spectrum remove_matched(std::span<const Complex> from, std::span<const Complex> remove);

}  // namespace dfpi
