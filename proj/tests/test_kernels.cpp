// Parallel kernels against the serial reference loops.
#include <gtest/gtest.h>

#include <cmath>

#include "dfpi/kernels.hpp"
#include "test_util.hpp"

namespace dfpi {
namespace {

using testing::random_sparse;
using testing::random_vector;

class KernelSizes : public ::testing::TestWithParam<std::size_t> {};

TEST_P(KernelSizes, DotMatchesSerial) {
  const std::size_t n = GetParam();
  const auto x = random_vector(n, 1), y = random_vector(n, 2);
  const double par = kernels::dot(x, y), ser = kernels::serial::dot(x, y);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale += std::abs(x[i] * y[i]);
  EXPECT_LE(std::abs(par - ser), 1e-14 * scale);
}

TEST_P(KernelSizes, Level1MatchesSerialExactly) {
  const std::size_t n = GetParam();
  const auto x = random_vector(n, 3);
  auto y1 = random_vector(n, 4), y2 = y1;
  kernels::axpy(0.37, x, y1);
  kernels::serial::axpy(0.37, x, y2);
  EXPECT_EQ(y1, y2);
  kernels::xpby(x, -1.5, y1);
  kernels::serial::xpby(x, -1.5, y2);
  EXPECT_EQ(y1, y2);
  kernels::scale(2.5, y1);
  kernels::serial::scale(2.5, y2);
  EXPECT_EQ(y1, y2);
}

TEST_P(KernelSizes, CsrMatvecMatchesSerialExactly) {
  const std::size_t n = GetParam() / 8 + 3;
  const auto a = random_sparse(n, 0.05, 11, 4.0);
  const auto x = random_vector(n, 12);
  Vector y1(n), y2(n);
  kernels::csr_matvec(n, a.row_offsets(), a.col_indices(), a.values(), x, y1);
  kernels::serial::csr_matvec(n, a.row_offsets(), a.col_indices(), a.values(), x, y2);
  EXPECT_EQ(y1, y2);
}

TEST_P(KernelSizes, CsrTransposeMatvecMatchesSerial) {
  const std::size_t n = GetParam() / 8 + 3;
  const auto a = random_sparse(n, 0.05, 13, 4.0);
  const auto x = random_vector(n, 14);
  Vector y1(n), y2(n);
  kernels::csr_transpose_matvec(n, a.row_offsets(), a.col_indices(), a.values(), x, y1);
  kernels::serial::csr_transpose_matvec(n, a.row_offsets(), a.col_indices(), a.values(), x, y2);
  EXPECT_LE(testing::rel_diff(y1, y2), 1e-14);
}

INSTANTIATE_TEST_SUITE_P(SmallAndLarge, KernelSizes, ::testing::Values(5, 1000, 20000, 100000));

TEST(Kernels, DotIsReproducible) {
  const auto x = random_vector(50000, 5), y = random_vector(50000, 6);
  const double first = kernels::dot(x, y);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(kernels::dot(x, y), first);
}

TEST(Kernels, DenseMatvecMatchesSerialExactly) {
  const auto a = testing::random_dense(200, 150, 7);
  const auto x = random_vector(150, 8);
  Vector y1(200), y2(200);
  kernels::dense_matvec(200, 150, a.data(), x, y1);
  kernels::serial::dense_matvec(200, 150, a.data(), x, y2);
  EXPECT_EQ(y1, y2);
}

}  // namespace
}  // namespace dfpi
