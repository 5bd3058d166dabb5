#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfpi/eigen.hpp"
#include "dfpi/sparse_matrix.hpp"

namespace dfpi {

struct GridMeta {
  std::size_t n;
  double h;
  double peclet;
};

struct Cd1dProblem {
  SparseMatrix a;
  GridMeta meta;
};

/// -u'' + pe u' on (0,1) with Dirichlet ends, scaled by h^2 and upwinded:
/// row i is (-1 - h pe, 2 + h pe, -1), h = 1/(n+1).
Cd1dProblem gen_cd1d(std::size_t n, double peclet);

/// 5-point Laplacian on an nx-by-ny grid, row-major, diagonal 4.
SparseMatrix gen_laplace2d(std::size_t nx, std::size_t ny);

/// V diag(spectrum) V^-1 with V = Id + eps G (G random normal) and eps
/// halved until cond2(V) <= cond_cap. Complex entries must come in conjugate
/// pairs; each pair a +- ib is realized as the block [[a, b], [-b, a]].
/// cond_cap <= 1 uses V = Id.
DenseMatrix gen_prescribed(std::size_t n, std::span<const Complex> spectrum, double cond_cap,
                           std::uint64_t seed);

struct JordanBlock {
  double lambda;
  std::size_t size;
};

struct JordanSpec {
  std::vector<JordanBlock> blocks;
  std::uint64_t seed = 0;
  bool identity_basis = false;

  std::size_t dim() const;
};

struct JordanMatrix {
  DenseMatrix m;  // V J V^-1
  DenseMatrix v;  // columns are the chains, block by block
  DenseMatrix j;
};

/// V is Id plus a scaled random perturbation with cond2(V) <= 10.
JordanMatrix gen_jordan(const JordanSpec& spec);

/// Eigenvalues for a system where Id - A has `bad` modes of modulus in
/// (1, rho] and the rest of modulus <= q, with conjugate pairs mixed in.
/// Returned as the spectrum of A (i.e. 1 - mu).
std::vector<Complex> trouble_spectrum(std::size_t n, std::size_t bad, double q, double rho,
                                      std::uint64_t seed);

enum class RhsRule { ones, random, from_solution };

/// ones: b = 1; random: uniform(-1,1); from_solution: b = A x* with x*
/// uniform(-1,1).
Vector make_rhs(const SparseMatrix& a, RhsRule rule, std::uint64_t seed);

class MatrixMarketError : public std::runtime_error {
 public:
  MatrixMarketError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::string& path);
/// Coordinate real general, one-based indices, 17 significant digits.
void write_matrix_market(const SparseMatrix& a, std::ostream& out);
void write_matrix_market(const SparseMatrix& a, const std::string& path);

/// Dense vector in Matrix Market array format.
Vector read_vector_market(const std::string& path);
void write_vector_market(std::span<const double> v, const std::string& path);

enum class ProblemKind { cd1d, laplace2d, prescribed, jordan, file };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::cd1d;
  std::size_t n = 100;
  double peclet = 50.0;
  std::size_t nx = 16, ny = 16;
  std::vector<Complex> spectrum;  // prescribed
  double cond_cap = 100.0;
  JordanSpec jordan;
  std::string path;
  RhsRule rhs = RhsRule::ones;
  std::uint64_t seed = 0;
};

/// Parses "cd1d:n=100,pe=50", "laplace2d:nx=16,ny=16",
/// "prescribed:n=50,bad=5,q=0.8,rho=1.5", "jordan:blocks=0.9x3;0.5x2" and
/// "file:path=A.mtx". Optional keys: rhs=ones|random|solution, seed=<int>.
ProblemSpec parse_problem_spec(const std::string& text);

struct Problem {
  SparseMatrix a;
  Vector b;
  std::string name;
};

Problem build_problem(const ProblemSpec& spec);

}  // namespace dfpi
