#include <gtest/gtest.h>

#include "dfpi/eigen.hpp"
#include "dfpi/preconditioner.hpp"
#include "oracles/dense_solve.hpp"
#include "test_util.hpp"

namespace dfpi {
namespace {

using testing::random_sparse;
using testing::random_vector;
using testing::rel_diff;

SparseMatrix tridiagonal(std::size_t n, double lo, double d, double up) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) t.push_back({i, i - 1, lo});
    t.push_back({i, i, d});
    if (i + 1 < n) t.push_back({i, i + 1, up});
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

SparseMatrix five_point(std::size_t m) {
  std::vector<Triplet> t;
  const auto id = [m](std::size_t i, std::size_t j) { return i * m + j; };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      t.push_back({id(i, j), id(i, j), 4.0});
      if (i > 0) t.push_back({id(i, j), id(i - 1, j), -1.0});
      if (i + 1 < m) t.push_back({id(i, j), id(i + 1, j), -1.0});
      if (j > 0) t.push_back({id(i, j), id(i, j - 1), -1.0});
      if (j + 1 < m) t.push_back({id(i, j), id(i, j + 1), -1.0});
    }
  return SparseMatrix::from_triplets(m * m, m * m, std::move(t));
}

TEST(Jacobi, Examples) {
  const auto p = Preconditioner::jacobi(SparseMatrix::from_dense(2.0 * DenseMatrix::identity(3)));
  EXPECT_EQ(p.apply(Vector{2, 4, -1}), (Vector{1, 2, -0.5}));
  const auto q = Preconditioner::jacobi(SparseMatrix::from_dense(DenseMatrix{{1, 0}, {0, 4}}));
  EXPECT_EQ(q.apply(Vector{1, 8}), (Vector{1, 2}));
  const auto r = Preconditioner::jacobi(SparseMatrix::from_dense(DenseMatrix{{2, 0}, {0, 5}}));
  EXPECT_EQ(r.apply(Vector{2, 5}), (Vector{1, 1}));
}

TEST(Jacobi, ZeroDiagonalNamesRow) {
  const DenseMatrix a{{1, 0, 0}, {0, 2, 1}, {1, 0, 0}};
  try {
    Preconditioner::jacobi(SparseMatrix::from_dense(a));
    FAIL() << "expected PivotError";
  } catch (const PivotError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
  }
}

TEST(Identity, ApplyIsCopy) {
  const auto p = Preconditioner::identity(3);
  EXPECT_EQ(p.apply(Vector{1, -2, 3}), (Vector{1, -2, 3}));
  EXPECT_THROW(p.apply(Vector{1, 2}), std::invalid_argument);
}

TEST(Ilu0, LowerTriangularIsExact) {
  const DenseMatrix a{{2, 0, 0}, {1, 3, 0}, {-1, 2, 4}};
  const auto p = Preconditioner::ilu0(SparseMatrix::from_dense(a));
  const Vector r{1, 2, 3};
  EXPECT_LE(rel_diff(matvec(a, p.apply(r)), r), 1e-15);
}

TEST(Ilu0, TridiagonalMatchesDenseSolve) {
  const auto a = tridiagonal(30, -1.3, 2.5, -0.7);
  const auto p = Preconditioner::ilu0(a);
  const Vector r = random_vector(30, 1);
  EXPECT_LE(rel_diff(p.apply(r), oracles::gauss_solve(a.to_dense(), r)), 1e-12);
}

TEST(Ilu0, TridiagonalRichardsonContractsToZero) {
  const auto a = tridiagonal(40, -1.5, 2.5, -1.0);
  const auto p = Preconditioner::ilu0(a);
  DenseMatrix e = DenseMatrix::identity(40) - preconditioned_operator(p, a.to_dense());
  EXPECT_LE(spectral_radius(dense_eig(e).values), 1e-10);
}

TEST(Ilu0, ZeroPivotNamesRow) {
  // Second pivot is 1 - 1*1 = 0.
  const DenseMatrix a{{1, 1, 0}, {1, 1, 1}, {0, 1, 3}};
  try {
    Preconditioner::ilu0(SparseMatrix::from_dense(a));
    FAIL() << "expected PivotError";
  } catch (const PivotError& e) {
    EXPECT_EQ(e.row(), 1u);
  }
}

TEST(Milu, RowSumsOfLUMatchA) {
  const auto a = five_point(6);
  const auto p = Preconditioner::ilu0(a, true);
  const Vector ones(a.rows(), 1.0);
  const Vector lu1 = p.multiply(ones), a1 = matvec(a, ones);
  for (std::size_t i = 0; i < a.rows(); ++i) EXPECT_NEAR(lu1[i], a1[i], 1e-12) << "row " << i;
  // Plain ILU(0) misses the row sums on this pattern.
  const Vector ilu1 = Preconditioner::ilu0(a).multiply(ones);
  EXPECT_GT(norm2(subtract(ilu1, a1)), 1e-3);
}

TEST(Milu, NoFillOutsidePattern) {
  const auto a = five_point(5);
  for (bool modified : {false, true}) {
    const auto p = Preconditioner::ilu0(a, modified);
    EXPECT_TRUE(std::equal(a.col_indices().begin(), a.col_indices().end(),
                           p.factors().col_indices().begin()));
    EXPECT_EQ(a.nnz(), p.factors().nnz());
  }
}

class AllKinds : public ::testing::TestWithParam<PrecondKind> {};

TEST_P(AllKinds, ApplyIsLinear) {
  const auto a = random_sparse(80, 0.05, 3, 6.0);
  const auto p = Preconditioner::build(GetParam(), a);
  const Vector r = random_vector(80, 4), s = random_vector(80, 5);
  const double alpha = 0.7, beta = -2.3;
  Vector comb = scaled(alpha, r);
  axpy(beta, s, comb);
  Vector expect = scaled(alpha, p.apply(r));
  axpy(beta, p.apply(s), expect);
  EXPECT_LE(rel_diff(p.apply(comb), expect), 1e-13);
}

TEST_P(AllKinds, TransposeAndMultiplyAreConsistent) {
  const auto a = random_sparse(60, 0.08, 9, 6.0);
  const auto p = Preconditioner::build(GetParam(), a);
  const Vector x = random_vector(60, 10), y = random_vector(60, 11);
  // <P^{-1} x, y> = <x, P^{-T} y>
  EXPECT_NEAR(dot(p.apply(x), y), dot(x, p.apply_transpose(y)), 1e-12 * norm2(x) * norm2(y));
  EXPECT_LE(rel_diff(p.apply(p.multiply(x)), x), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Kinds, AllKinds,
                         ::testing::Values(PrecondKind::identity, PrecondKind::jacobi,
                                           PrecondKind::ilu0, PrecondKind::milu));

TEST(PrecondKind, ParseRoundTrip) {
  for (auto k : {PrecondKind::identity, PrecondKind::jacobi, PrecondKind::ilu0, PrecondKind::milu})
    EXPECT_EQ(parse_precond_kind(to_string(k)), k);
  EXPECT_THROW(parse_precond_kind("ilu1"), std::invalid_argument);
}

}  // namespace
}  // namespace dfpi
