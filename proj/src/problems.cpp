#include "dfpi/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <numbers>
#include <random>
#include <sstream>

#include "dfpi/dense_decomp.hpp"

namespace dfpi {

Cd1dProblem gen_cd1d(std::size_t n, double peclet) {
  if (n < 2) throw std::invalid_argument("cd1d: n must be at least 2");
  if (peclet < 0.0) throw std::invalid_argument("cd1d: peclet must be non-negative");
  const double h = 1.0 / static_cast<double>(n + 1);
  std::vector<Triplet> t;
  t.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) t.push_back({i, i - 1, -1.0 - h * peclet});
    t.push_back({i, i, 2.0 + h * peclet});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return {SparseMatrix::from_triplets(n, n, std::move(t)), {n, h, peclet}};
}

SparseMatrix gen_laplace2d(std::size_t nx, std::size_t ny) {
  if (nx < 1 || ny < 1 || nx * ny < 2) throw std::invalid_argument("laplace2d: grid too small");
  const std::size_t n = nx * ny;
  std::vector<Triplet> t;
  t.reserve(5 * n);
  for (std::size_t iy = 0; iy < ny; ++iy)
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t k = iy * nx + ix;
      if (iy > 0) t.push_back({k, k - nx, -1.0});
      if (ix > 0) t.push_back({k, k - 1, -1.0});
      t.push_back({k, k, 4.0});
      if (ix + 1 < nx) t.push_back({k, k + 1, -1.0});
      if (iy + 1 < ny) t.push_back({k, k + nx, -1.0});
    }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

namespace {

DenseMatrix random_normal(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> dist;
  DenseMatrix g(n, n);
  for (auto& x : g.data()) x = dist(gen);
  return g;
}

// Id + eps G with eps halved until the condition cap holds.
DenseMatrix perturbed_identity(std::size_t n, double cond_cap, std::uint64_t seed) {
  if (cond_cap <= 1.0) return DenseMatrix::identity(n);
  std::mt19937_64 gen(seed);
  const DenseMatrix g = random_normal(n, gen);
  double eps = 1.0 / std::sqrt(static_cast<double>(n));
  for (int tries = 0; tries < 60; ++tries, eps *= 0.5) {
    DenseMatrix v = DenseMatrix::identity(n) + eps * g;
    if (condition_number_2(v) <= cond_cap) return v;
  }
  return DenseMatrix::identity(n);
}

}  // namespace

DenseMatrix gen_prescribed(std::size_t n, std::span<const Complex> spectrum, double cond_cap,
                           std::uint64_t seed) {
  if (spectrum.size() != n) throw std::invalid_argument("prescribed: spectrum length must be n");
  // Pair every value with positive imaginary part with its conjugate.
  std::vector<bool> used(n, false);
  DenseMatrix d(n, n);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (used[k]) continue;
    const Complex z = spectrum[k];
    if (z.imag() == 0.0) {
      d(pos, pos) = z.real();
      used[k] = true;
      ++pos;
      continue;
    }
    std::size_t mate = n;
    for (std::size_t l = k + 1; l < n && mate == n; ++l)
      if (!used[l] && std::abs(spectrum[l] - std::conj(z)) <= 1e-12 * std::abs(z)) mate = l;
    if (mate == n)
      throw std::invalid_argument("prescribed: spectrum is not closed under conjugation");
    used[k] = used[mate] = true;
    const double a = z.real(), b = std::abs(z.imag());
    d(pos, pos) = a;
    d(pos, pos + 1) = b;
    d(pos + 1, pos) = -b;
    d(pos + 1, pos + 1) = a;
    pos += 2;
  }
  const DenseMatrix v = perturbed_identity(n, cond_cap, seed);
  if (cond_cap <= 1.0) return d;
  return v * d * inverse(v);
}

std::size_t JordanSpec::dim() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.size;
  return n;
}

JordanMatrix gen_jordan(const JordanSpec& spec) {
  const std::size_t n = spec.dim();
  if (n == 0) throw std::invalid_argument("jordan: no blocks");
  DenseMatrix j(n, n);
  std::size_t pos = 0;
  for (const auto& b : spec.blocks) {
    if (b.size < 1) throw std::invalid_argument("jordan: block size must be at least 1");
    for (std::size_t k = 0; k < b.size; ++k) {
      j(pos + k, pos + k) = b.lambda;
      if (k + 1 < b.size) j(pos + k, pos + k + 1) = 1.0;
    }
    pos += b.size;
  }
  JordanMatrix out;
  out.j = j;
  out.v = perturbed_identity(n, spec.identity_basis ? 1.0 : 10.0, spec.seed);
  out.m = spec.identity_basis ? j : out.v * j * inverse(out.v);
  return out;
}

std::vector<Complex> trouble_spectrum(std::size_t n, std::size_t bad, double q, double rho,
                                      std::uint64_t seed) {
  if (bad + 1 > n) throw std::invalid_argument("trouble_spectrum: too many bad modes");
  if (!(q > 0.0 && q < 1.0 && rho > 1.0)) throw std::invalid_argument("trouble_spectrum: need 0<q<1<rho");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Complex> mu;
  mu.reserve(n);
  std::size_t left = bad;
  // One conjugate pair among the bad modes when there is room.
  if (left >= 3) {
    const double r = 1.1 + (rho - 1.1) * u(gen);
    const double th = 0.3 + 2.0 * u(gen);
    mu.push_back(std::polar(r, th));
    mu.push_back(std::polar(r, -th));
    left -= 2;
  }
  for (std::size_t k = 0; k < left; ++k) {
    const double r = 1.1 + (rho - 1.1) * (k + u(gen)) / static_cast<double>(left);
    mu.emplace_back(k % 2 == 0 ? r : -r, 0.0);
  }
  mu.emplace_back(q, 0.0);
  bool pair = false;
  while (mu.size() < n) {
    const double r = 0.9 * q * (0.05 + 0.95 * u(gen));
    if (pair && mu.size() + 2 <= n) {
      const double th = 0.2 + 2.7 * u(gen);
      mu.push_back(std::polar(r, th));
      mu.push_back(std::polar(r, -th));
    } else {
      mu.emplace_back(u(gen) < 0.5 ? r : -r, 0.0);
    }
    pair = !pair;
  }
  std::vector<Complex> lambda;
  lambda.reserve(n);
  for (const auto& m : mu) lambda.push_back(Complex(1.0, 0.0) - m);
  return lambda;
}

Vector make_rhs(const SparseMatrix& a, RhsRule rule, std::uint64_t seed) {
  const std::size_t n = a.rows();
  if (rule == RhsRule::ones) return Vector(n, 1.0);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (auto& x : v) x = dist(gen);
  return rule == RhsRule::random ? v : matvec(a, v);
}

// --- Matrix Market -----------------------------------------------------------

MatrixMarketError::MatrixMarketError(std::size_t line, const std::string& what)
    : std::runtime_error("matrix market line " + std::to_string(line) + ": " + what),
      line_(line) {}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

struct Header {
  bool array = false;
  bool symmetric = false;
};

Header read_header(std::istream& in, std::size_t& line_no) {
  std::string line;
  if (!std::getline(in, line)) throw MatrixMarketError(1, "empty input");
  line_no = 1;
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix")
    throw MatrixMarketError(1, "missing %%MatrixMarket matrix header");
  Header h;
  format = lower(format);
  if (format == "array")
    h.array = true;
  else if (format != "coordinate")
    throw MatrixMarketError(1, "unsupported format '" + format + "'");
  if (lower(field) != "real") throw MatrixMarketError(1, "field must be real, got '" + field + "'");
  symmetry = lower(symmetry);
  if (symmetry == "symmetric")
    h.symmetric = true;
  else if (symmetry != "general")
    throw MatrixMarketError(1, "unsupported symmetry '" + symmetry + "'");
  return h;
}

// Next non-comment, non-blank line.
bool next_data_line(std::istream& in, std::size_t& line_no, std::string& line) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    return true;
  }
  return false;
}

double parse_double(const std::string& tok, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || *end != '\0') throw MatrixMarketError(line_no, "bad value '" + tok + "'");
  return v;
}

std::size_t parse_index(const std::string& tok, std::size_t line_no) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (tok.empty() || *end != '\0' || v < 0) throw MatrixMarketError(line_no, "bad integer '" + tok + "'");
  return static_cast<std::size_t>(v);
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
  std::size_t line_no = 0;
  const Header h = read_header(in, line_no);
  if (h.array) throw MatrixMarketError(1, "expected coordinate format for a matrix");
  std::string line;
  if (!next_data_line(in, line_no, line)) throw MatrixMarketError(line_no, "missing size line");
  auto size = tokens(line);
  if (size.size() != 3) throw MatrixMarketError(line_no, "size line needs rows cols nnz");
  const std::size_t rows = parse_index(size[0], line_no), cols = parse_index(size[1], line_no),
                    nnz = parse_index(size[2], line_no);
  if (h.symmetric && rows != cols) throw MatrixMarketError(line_no, "symmetric matrix must be square");
  std::vector<Triplet> t;
  t.reserve(h.symmetric ? 2 * nnz : nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    if (!next_data_line(in, line_no, line))
      throw MatrixMarketError(line_no, "expected " + std::to_string(nnz) + " entries, got " +
                                           std::to_string(k));
    const auto tok = tokens(line);
    if (tok.size() != 3) throw MatrixMarketError(line_no, "entry needs row col value");
    const std::size_t i = parse_index(tok[0], line_no), j = parse_index(tok[1], line_no);
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw MatrixMarketError(line_no, "index out of range");
    const double v = parse_double(tok[2], line_no);
    if (h.symmetric && j > i)
      throw MatrixMarketError(line_no, "symmetric file has an entry above the diagonal");
    t.push_back({i - 1, j - 1, v});
    if (h.symmetric && i != j) t.push_back({j - 1, i - 1, v});
  }
  if (next_data_line(in, line_no, line)) throw MatrixMarketError(line_no, "trailing data");
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_matrix_market(in);
}

void write_matrix_market(const SparseMatrix& a, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  out << std::setprecision(17);
  const auto off = a.row_offsets();
  const auto col = a.col_indices();
  const auto val = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t p = off[i]; p < off[i + 1]; ++p)
      out << i + 1 << ' ' << col[p] + 1 << ' ' << val[p] << '\n';
}

void write_matrix_market(const SparseMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_matrix_market(a, out);
}

Vector read_vector_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::size_t line_no = 0;
  const Header h = read_header(in, line_no);
  if (!h.array) throw MatrixMarketError(1, "expected array format for a vector");
  std::string line;
  if (!next_data_line(in, line_no, line)) throw MatrixMarketError(line_no, "missing size line");
  const auto size = tokens(line);
  if (size.size() != 2 || parse_index(size[1], line_no) != 1)
    throw MatrixMarketError(line_no, "vector size line must be 'n 1'");
  const std::size_t n = parse_index(size[0], line_no);
  Vector v(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!next_data_line(in, line_no, line))
      throw MatrixMarketError(line_no, "expected " + std::to_string(n) + " values");
    const auto tok = tokens(line);
    if (tok.size() != 1) throw MatrixMarketError(line_no, "one value per line");
    v[k] = parse_double(tok[0], line_no);
  }
  return v;
}

void write_vector_market(std::span<const double> v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "%%MatrixMarket matrix array real general\n" << v.size() << " 1\n";
  out << std::setprecision(17);
  for (double x : v) out << x << '\n';
}

// --- problem specs ----------------------------------------------------------

namespace {

std::map<std::string, std::string> parse_params(const std::string& s) {
  std::map<std::string, std::string> out;
  std::istringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("problem parameter '" + item + "' lacks '='");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') throw std::invalid_argument("bad number for '" + key + "': " + v);
  return d;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d < 0 || d != std::floor(d)) throw std::invalid_argument("'" + key + "' must be a count");
  return static_cast<std::size_t>(d);
}

}  // namespace

ProblemSpec parse_problem_spec(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  auto params = parse_params(colon == std::string::npos ? "" : text.substr(colon + 1));
  ProblemSpec spec;
  const auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    std::string v = it->second;
    params.erase(it);
    return v;
  };
  if (auto v = take("seed")) spec.seed = to_size("seed", *v);
  if (auto v = take("rhs")) {
    if (*v == "ones") spec.rhs = RhsRule::ones;
    else if (*v == "random") spec.rhs = RhsRule::random;
    else if (*v == "solution") spec.rhs = RhsRule::from_solution;
    else throw std::invalid_argument("rhs must be ones, random or solution");
  }

  if (kind == "cd1d") {
    spec.kind = ProblemKind::cd1d;
    if (auto v = take("n")) spec.n = to_size("n", *v);
    if (auto v = take("pe")) spec.peclet = to_double("pe", *v);
  } else if (kind == "laplace2d") {
    spec.kind = ProblemKind::laplace2d;
    if (auto v = take("nx")) spec.nx = to_size("nx", *v);
    spec.ny = spec.nx;
    if (auto v = take("ny")) spec.ny = to_size("ny", *v);
  } else if (kind == "prescribed") {
    spec.kind = ProblemKind::prescribed;
    spec.n = 50;
    std::size_t bad = 5;
    double q = 0.8, rho = 1.5;
    if (auto v = take("n")) spec.n = to_size("n", *v);
    if (auto v = take("bad")) bad = to_size("bad", *v);
    if (auto v = take("q")) q = to_double("q", *v);
    if (auto v = take("rho")) rho = to_double("rho", *v);
    if (auto v = take("cond")) spec.cond_cap = to_double("cond", *v);
    spec.spectrum = trouble_spectrum(spec.n, bad, q, rho, spec.seed);
  } else if (kind == "jordan") {
    spec.kind = ProblemKind::jordan;
    spec.jordan.seed = spec.seed;
    const auto blocks = take("blocks");
    if (!blocks) throw std::invalid_argument("jordan problem needs blocks=<lambda>x<size>;...");
    std::istringstream ss(*blocks);
    for (std::string b; std::getline(ss, b, ';');) {
      const auto x = b.find('x');
      if (x == std::string::npos) throw std::invalid_argument("jordan block '" + b + "' must be <lambda>x<size>");
      spec.jordan.blocks.push_back({to_double("blocks", b.substr(0, x)), to_size("blocks", b.substr(x + 1))});
    }
  } else if (kind == "file") {
    spec.kind = ProblemKind::file;
    const auto p = take("path");
    if (!p) throw std::invalid_argument("file problem needs path=<file.mtx>");
    spec.path = *p;
  } else {
    throw std::invalid_argument("unknown problem kind '" + kind + "'");
  }
  if (!params.empty())
    throw std::invalid_argument("unknown problem parameter '" + params.begin()->first + "'");
  return spec;
}

Problem build_problem(const ProblemSpec& spec) {
  Problem p;
  std::ostringstream name;
  switch (spec.kind) {
    case ProblemKind::cd1d:
      p.a = gen_cd1d(spec.n, spec.peclet).a;
      name << "cd1d(n=" << spec.n << ",pe=" << spec.peclet << ")";
      break;
    case ProblemKind::laplace2d:
      p.a = gen_laplace2d(spec.nx, spec.ny);
      name << "laplace2d(" << spec.nx << "x" << spec.ny << ")";
      break;
    case ProblemKind::prescribed:
      p.a = SparseMatrix::from_dense(gen_prescribed(spec.n, spec.spectrum, spec.cond_cap, spec.seed));
      name << "prescribed(n=" << spec.n << ",seed=" << spec.seed << ")";
      break;
    case ProblemKind::jordan:
      p.a = SparseMatrix::from_dense(gen_jordan(spec.jordan).m);
      name << "jordan(n=" << spec.jordan.dim() << ")";
      break;
    case ProblemKind::file:
      p.a = read_matrix_market(spec.path);
      name << spec.path;
      break;
  }
  if (p.a.rows() != p.a.cols()) throw std::invalid_argument("problem matrix must be square");
  p.b = make_rhs(p.a, spec.rhs, spec.seed);
  p.name = name.str();
  return p;
}

}  // namespace dfpi
