// Serial reference loops against the OpenMP kernels.
// Run with OMP_NUM_THREADS set to compare thread counts.
#include <benchmark/benchmark.h>

#include <random>

#include "dfpi/kernels.hpp"
#include "dfpi/problems.hpp"

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

template <bool Parallel>
void BM_Dot(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_vector(n, 1), y = random_vector(n, 2);
  for (auto _ : state) {
    double d = Parallel ? dfpi::kernels::dot(x, y) : dfpi::kernels::serial::dot(x, y);
    benchmark::DoNotOptimize(d);
  }
  state.SetBytesProcessed(state.iterations() * 2 * n * sizeof(double));
}

template <bool Parallel>
void BM_Axpy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_vector(n, 1);
  auto y = random_vector(n, 2);
  for (auto _ : state) {
    if (Parallel)
      dfpi::kernels::axpy(1e-9, x, y);
    else
      dfpi::kernels::serial::axpy(1e-9, x, y);
    benchmark::ClobberMemory();
  }
  state.SetBytesProcessed(state.iterations() * 3 * n * sizeof(double));
}

template <bool Parallel>
void BM_Laplace2dMatvec(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto a = dfpi::gen_laplace2d(m, m);
  const auto x = random_vector(a.rows(), 3);
  std::vector<double> y(a.rows());
  for (auto _ : state) {
    if (Parallel)
      dfpi::kernels::csr_matvec(a.rows(), a.row_offsets(), a.col_indices(), a.values(), x, y);
    else
      dfpi::kernels::serial::csr_matvec(a.rows(), a.row_offsets(), a.col_indices(), a.values(), x,
                                        y);
    benchmark::ClobberMemory();
  }
  state.counters["nnz"] = static_cast<double>(a.nnz());
}

BENCHMARK(BM_Dot<false>)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_Dot<true>)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_Axpy<false>)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_Axpy<true>)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_Laplace2dMatvec<false>)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_Laplace2dMatvec<true>)->Arg(64)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
