#pragma once

// Level-1 and matrix-vector kernels. The default namespace holds the
// OpenMP versions used by every solver; kernels::serial keeps the plain
// loops as the reference the parallel versions are tested and benchmarked
// against.
//
// Reductions are split into a fixed number of blocks that does not depend
// on the thread count, so results are reproducible bit-for-bit across
// OMP_NUM_THREADS settings.

#include <cstddef>
#include <span>

namespace dfpi::kernels {

/// Vectors shorter than this run the serial loop.
inline constexpr std::size_t parallel_threshold = 8192;
/// Number of partial sums in a blocked reduction.
inline constexpr std::size_t reduction_blocks = 64;

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = x + beta * y
void xpby(std::span<const double> x, double beta, std::span<double> y);
void scale(double alpha, std::span<double> x);

/// y = A x for CSR A.
void csr_matvec(std::size_t rows, std::span<const std::size_t> offsets,
                std::span<const std::size_t> cols, std::span<const double> values,
                std::span<const double> x, std::span<double> y);
/// y = A^T x for CSR A; y has length ncols and is overwritten.
void csr_transpose_matvec(std::size_t rows, std::span<const std::size_t> offsets,
                          std::span<const std::size_t> cols, std::span<const double> values,
                          std::span<const double> x, std::span<double> y);
/// y = A x for row-major A.
void dense_matvec(std::size_t rows, std::size_t ncols, std::span<const double> a,
                  std::span<const double> x, std::span<double> y);

/// Number of OpenMP threads available (1 without OpenMP).
int max_threads();

namespace serial {

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double beta, std::span<double> y);
void scale(double alpha, std::span<double> x);
void csr_matvec(std::size_t rows, std::span<const std::size_t> offsets,
                std::span<const std::size_t> cols, std::span<const double> values,
                std::span<const double> x, std::span<double> y);
void csr_transpose_matvec(std::size_t rows, std::span<const std::size_t> offsets,
                          std::span<const std::size_t> cols, std::span<const double> values,
                          std::span<const double> x, std::span<double> y);
void dense_matvec(std::size_t rows, std::size_t ncols, std::span<const double> a,
                  std::span<const double> x, std::span<double> y);

}  // namespace serial
}  // namespace dfpi::kernels
