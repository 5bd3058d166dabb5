#include "dfpi/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dfpi::kernels {

namespace {

struct BlockRange {
  std::size_t begin;
  std::size_t end;
};

BlockRange block_range(std::size_t n, std::size_t block, std::size_t nblocks) {
  const std::size_t base = n / nblocks;
  const std::size_t extra = n % nblocks;
  const std::size_t begin = block * base + std::min(block, extra);
  return {begin, begin + base + (block < extra ? 1 : 0)};
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < parallel_threshold) return serial::dot(x, y);
  std::array<double, reduction_blocks> partial{};
  const auto nb = static_cast<std::ptrdiff_t>(reduction_blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const auto r = block_range(n, static_cast<std::size_t>(b), reduction_blocks);
    double s = 0.0;
    for (std::size_t i = r.begin; i < r.end; ++i) s += x[i] * y[i];
    partial[static_cast<std::size_t>(b)] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (x.size() >= parallel_threshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (x.size() >= parallel_threshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void scale(double alpha, std::span<double> x) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (x.size() >= parallel_threshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) x[i] *= alpha;
}

void csr_matvec(std::size_t rows, std::span<const std::size_t> offsets,
                std::span<const std::size_t> cols, std::span<const double> values,
                std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static) if (values.size() >= parallel_threshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) s += values[k] * x[cols[k]];
    y[i] = s;
  }
}

void csr_transpose_matvec(std::size_t rows, std::span<const std::size_t> offsets,
                          std::span<const std::size_t> cols, std::span<const double> values,
                          std::span<const double> x, std::span<double> y) {
  if (values.size() < parallel_threshold) {
    serial::csr_transpose_matvec(rows, offsets, cols, values, x, y);
    return;
  }
  // Scatter into one private buffer per row block, then sum the buffers in
  // block order.
  constexpr std::size_t nblocks = 8;
  const std::size_t ncols = y.size();
  std::vector<double> partial(nblocks * ncols, 0.0);
  const auto nb = static_cast<std::ptrdiff_t>(nblocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const auto r = block_range(rows, static_cast<std::size_t>(b), nblocks);
    double* out = partial.data() + static_cast<std::size_t>(b) * ncols;
    for (std::size_t i = r.begin; i < r.end; ++i)
      for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) out[cols[k]] += values[k] * x[i];
  }
  const auto nc = static_cast<std::ptrdiff_t>(ncols);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < nc; ++j) {
    double s = 0.0;
    for (std::size_t b = 0; b < nblocks; ++b) s += partial[b * ncols + static_cast<std::size_t>(j)];
    y[j] = s;
  }
}

void dense_matvec(std::size_t rows, std::size_t ncols, std::span<const double> a,
                  std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static) if (a.size() >= parallel_threshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double* row = a.data() + static_cast<std::size_t>(i) * ncols;
    double s = 0.0;
    for (std::size_t j = 0; j < ncols; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

namespace serial {

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * y[i];
}

void scale(double alpha, std::span<double> x) {
  for (double& v : x) v *= alpha;
}

void csr_matvec(std::size_t rows, std::span<const std::size_t> offsets,
                std::span<const std::size_t> cols, std::span<const double> values,
                std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) s += values[k] * x[cols[k]];
    y[i] = s;
  }
}

void csr_transpose_matvec(std::size_t rows, std::span<const std::size_t> offsets,
                          std::span<const std::size_t> cols, std::span<const double> values,
                          std::span<const double> x, std::span<double> y) {
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) y[cols[k]] += values[k] * x[i];
}

void dense_matvec(std::size_t rows, std::size_t ncols, std::span<const double> a,
                  std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < ncols; ++j) s += a[i * ncols + j] * x[j];
    y[i] = s;
  }
}

}  // namespace serial
}  // namespace dfpi::kernels
