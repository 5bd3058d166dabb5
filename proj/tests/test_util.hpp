#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dfpi/dense_matrix.hpp"
#include "dfpi/sparse_matrix.hpp"
#include "dfpi/vector_ops.hpp"

namespace dfpi::testing {

inline Vector random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

inline DenseMatrix random_dense(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseMatrix a(rows, cols);
  for (auto& x : a.data()) x = dist(gen);
  return a;
}

/// Random square sparse matrix with a dominant diagonal and ~density fill.
inline SparseMatrix random_sparse(std::size_t n, double density, std::uint64_t seed,
                                  double diag_shift = 0.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i == j)
        t.push_back({i, j, dist(gen) + diag_shift});
      else if (coin(gen) < density)
        t.push_back({i, j, dist(gen)});
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

inline double rel_diff(std::span<const double> a, std::span<const double> b) {
  const double d = norm2(subtract(a, b));
  const double s = std::max(norm2(a), norm2(b));
  return s > 0.0 ? d / s : d;
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

inline Vector unit(std::size_t n, std::size_t k) {
  Vector e(n, 0.0);
  e[k] = 1.0;
  return e;
}

}  // namespace dfpi::testing
