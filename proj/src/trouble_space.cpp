#include "dfpi/trouble_space.hpp"

#include <stdexcept>

#include "dfpi/dense_decomp.hpp"
#include "dfpi/vector_ops.hpp"

namespace dfpi {

const char* to_string(ProjectionMode m) {
  switch (m) {
    case ProjectionMode::galerkin: return "galerkin";
    case ProjectionMode::lsq_a: return "lsq-a";
    case ProjectionMode::lsq_pa: return "lsq-pa";
  }
  return "?";
}

ProjectionMode parse_projection_mode(const std::string& s) {
  if (s == "galerkin") return ProjectionMode::galerkin;
  if (s == "lsq-a" || s == "lsq_a") return ProjectionMode::lsq_a;
  if (s == "lsq-pa" || s == "lsq_pa") return ProjectionMode::lsq_pa;
  throw std::invalid_argument("unknown projection mode '" + s + "'");
}

const char* to_string(TroubleEvent::Kind k) {
  switch (k) {
    case TroubleEvent::Kind::appended: return "append";
    case TroubleEvent::Kind::dropped_dependent: return "drop_dependent";
    case TroubleEvent::Kind::removed_deficient: return "remove_deficient";
    case TroubleEvent::Kind::dropped_oldest: return "drop_oldest";
  }
  return "?";
}

TroubleSpace::TroubleSpace(const SparseMatrix& a, const Preconditioner& p, ProjectionMode mode,
                           std::optional<std::size_t> capacity, double drop_tol)
    : a_(&a), p_(&p), mode_(mode), capacity_(capacity), drop_tol_(drop_tol) {
  if (a.rows() != a.cols()) throw std::invalid_argument("trouble space: matrix is not square");
  require_same_size(p.size(), a.rows(), "trouble space preconditioner");
  if (capacity && *capacity == 0) throw std::invalid_argument("trouble space: zero capacity");
}

TroubleSpace TroubleSpace::build(std::span<const Vector> vectors, ProjectionMode mode,
                                 const SparseMatrix& a, const Preconditioner& p,
                                 std::optional<std::size_t> capacity) {
  TroubleSpace ts(a, p, mode, capacity);
  for (const auto& v : vectors) ts.append(v);
  return ts;
}

std::vector<Vector> TroubleSpace::test_basis() const {
  switch (mode_) {
    case ProjectionMode::galerkin: return z_;
    case ProjectionMode::lsq_a: return w_;
    case ProjectionMode::lsq_pa: {
      std::vector<Vector> y;
      y.reserve(w_.size());
      for (const auto& w : w_) y.push_back(p_->apply_transpose(p_->apply(w)));
      return y;
    }
  }
  return {};
}

DenseMatrix TroubleSpace::core_matrix() const {
  const auto y = test_basis();
  DenseMatrix g(size(), size());
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j) g(i, j) = dot(y[i], w_[j]);
  return g;
}

Vector TroubleSpace::coefficients(std::span<const double> r) const {
  require_same_size(r.size(), dim(), "trouble space residual");
  const std::size_t m = size();
  if (m == 0) return {};
  if (mode_ == ProjectionMode::galerkin) {
    Vector g(m);
    for (std::size_t i = 0; i < m; ++i) g[i] = dot(z_[i], r);
    return galerkin_.solve(g);
  }
  const Vector rt = mode_ == ProjectionMode::lsq_pa ? p_->apply(r) : Vector(r.begin(), r.end());
  Vector c(m);
  for (std::size_t i = 0; i < m; ++i) c[i] = dot(q_[i], rt);
  for (std::size_t i = m; i-- > 0;) {
    double s = c[i];
    for (std::size_t j = i + 1; j < m; ++j) s -= r_(i, j) * c[j];
    c[i] = s / r_(i, i);
  }
  return c;
}

Vector TroubleSpace::combine_basis(std::span<const double> alpha) const {
  Vector out(dim(), 0.0);
  for (std::size_t j = 0; j < alpha.size(); ++j) axpy(alpha[j], z_[j], out);
  return out;
}

Vector TroubleSpace::combine_images(std::span<const double> alpha) const {
  Vector out(dim(), 0.0);
  for (std::size_t j = 0; j < alpha.size(); ++j) axpy(alpha[j], w_[j], out);
  return out;
}

Vector TroubleSpace::apply_QR_error(std::span<const double> r) const {
  return combine_basis(coefficients(r));
}

Vector TroubleSpace::apply_Id_minus_QR(std::span<const double> e, std::span<const double> r) const {
  require_same_size(e.size(), dim(), "trouble space error");
  Vector out(e.begin(), e.end());
  const Vector alpha = coefficients(r);
  for (std::size_t j = 0; j < alpha.size(); ++j) axpy(-alpha[j], z_[j], out);
  return out;
}

Vector TroubleSpace::apply_QR(std::span<const double> u) const {
  return apply_QR_error(matvec(*a_, u));
}

bool TroubleSpace::append(std::span<const double> z) {
  require_same_size(z.size(), dim(), "trouble space vector");
  if (capacity_ && size() >= *capacity_)
    throw std::length_error("trouble space: capacity " + std::to_string(*capacity_) +
                            " reached; drop before appending");
  return try_add(z, true);
}

bool TroubleSpace::try_add(std::span<const double> z, bool log_events) {
  const auto log = [&](TroubleEvent::Kind k) {
    if (log_events) events_.push_back({k, size()});
  };
  const double znorm = norm2(z);
  Remainder rem = orthogonalize_against(z_, z);
  if (znorm == 0.0 || rem.norm <= drop_tol_ * znorm) {
    log(TroubleEvent::Kind::dropped_dependent);
    return false;
  }
  Vector q = scaled(1.0 / rem.norm, rem.vector);
  Vector w = matvec(*a_, q);
  const std::size_t m = size();

  if (mode_ == ProjectionMode::galerkin) {
    DenseMatrix g(m + 1, m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
      const Vector& zi = i < m ? z_[i] : q;
      for (std::size_t j = 0; j <= m; ++j) g(i, j) = dot(zi, j < m ? w_[j] : w);
    }
    SmallFactor f(g);
    if (f.deficient()) {
      log(TroubleEvent::Kind::removed_deficient);
      return false;
    }
    galerkin_ = std::move(f);
  } else {
    const Vector wt = mode_ == ProjectionMode::lsq_pa ? p_->apply(w) : w;
    Remainder wr = orthogonalize_against(q_, wt);
    if (wr.norm <= drop_tol_ * norm2(wt)) {
      log(TroubleEvent::Kind::removed_deficient);
      return false;
    }
    DenseMatrix r(m + 1, m + 1);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) r(i, j) = r_(i, j);
    for (std::size_t i = 0; i < m; ++i) r(i, m) = wr.coeffs[i];
    r(m, m) = wr.norm;
    r_ = std::move(r);
    q_.push_back(scaled(1.0 / wr.norm, wr.vector));
  }
  raw_.emplace_back(z.begin(), z.end());
  z_.push_back(std::move(q));
  w_.push_back(std::move(w));
  log(TroubleEvent::Kind::appended);
  return true;
}

void TroubleSpace::rebuild(std::vector<Vector> raw) {
  raw_.clear();
  z_.clear();
  w_.clear();
  q_.clear();
  r_ = DenseMatrix();
  galerkin_ = SmallFactor();
  for (const auto& v : raw)
    if (!try_add(v, false)) events_.push_back({TroubleEvent::Kind::removed_deficient, size()});
}

void TroubleSpace::drop_oldest() {
  if (empty()) throw std::out_of_range("trouble space: drop_oldest on an empty space");
  rebuild(std::vector<Vector>(raw_.begin() + 1, raw_.end()));
  events_.push_back({TroubleEvent::Kind::dropped_oldest, size()});
}

void TroubleSpace::clear() { rebuild({}); }

DenseMatrix explicit_projector(const TroubleSpace& ts, const DenseMatrix& a) {
  const std::size_t n = a.rows();
  if (ts.empty()) return DenseMatrix(n, n);
  const DenseMatrix z = DenseMatrix::from_columns(ts.basis());
  const DenseMatrix y = DenseMatrix::from_columns(ts.test_basis());
  const DenseMatrix yta = y.transposed() * a;
  return z * solve(yta * z, yta);
}

}  // namespace dfpi
