#include "dfpi/dfpi.hpp"

#include <cmath>
#include <stdexcept>

#include "dfpi/dense_decomp.hpp"
#include "dfpi/vector_ops.hpp"

namespace dfpi {

const char* to_string(DfpiVariant v) {
  switch (v) {
    case DfpiVariant::pre_projection: return "pre_projection";
    case DfpiVariant::final_correction: return "final_correction";
    case DfpiVariant::post_projection: return "post_projection";
    case DfpiVariant::init_projection: return "init_projection";
  }
  return "?";
}

void SolverOptions::validate() const {
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
}

Vector richardson_step(const SparseMatrix& a, std::span<const double> b, const Preconditioner& p,
                       std::span<const double> x) {
  require_same_size(b.size(), a.rows(), "richardson right-hand side");
  require_same_size(x.size(), a.cols(), "richardson iterate");
  return add(x, p.apply(subtract(b, matvec(a, x))));
}

Vector project_iterate(const TroubleSpace& ts, std::span<const double> b,
                       std::span<const double> x) {
  return add(x, ts.apply_QR_error(subtract(b, matvec(ts.matrix(), x))));
}

DfpiStep dfpi_step(const TroubleSpace& ts, std::span<const double> b, std::span<const double> x,
                   DfpiVariant variant) {
  const SparseMatrix& a = ts.matrix();
  const Preconditioner& p = ts.preconditioner();
  require_same_size(b.size(), a.rows(), "dfpi right-hand side");
  require_same_size(x.size(), a.rows(), "dfpi iterate");
  const Vector r = subtract(b, matvec(a, x));
  switch (variant) {
    case DfpiVariant::pre_projection: {
      const Vector alpha = ts.coefficients(r);
      Vector xh = add(x, ts.combine_basis(alpha));
      const Vector rh = subtract(r, ts.combine_images(alpha));
      Vector xn = add(xh, p.apply(rh));
      return {std::move(xh), std::move(xn)};
    }
    case DfpiVariant::final_correction: {
      const Vector alpha = ts.coefficients(r);
      return {std::nullopt, add(x, p.apply(subtract(r, ts.combine_images(alpha))))};
    }
    case DfpiVariant::post_projection: {
      Vector xh = add(x, p.apply(r));
      Vector xn = project_iterate(ts, b, xh);
      return {std::move(xh), std::move(xn)};
    }
    case DfpiVariant::init_projection: {
      const Vector u = p.apply(r);
      Vector xn = add(x, u);
      axpy(-1.0, ts.apply_QR(u), xn);
      return {std::nullopt, std::move(xn)};
    }
  }
  throw std::invalid_argument("unknown dfpi variant");
}

namespace {

SolveResult run(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                const Preconditioner& p, TroubleSpace& ts, Recruiter* recruiter,
                const SolverOptions& opts) {
  opts.validate();
  require_same_size(b.size(), a.rows(), "dfpi right-hand side");
  require_same_size(x0.size(), a.rows(), "dfpi initial guess");
  if (&ts.matrix() != &a || &ts.preconditioner() != &p)
    throw std::invalid_argument("dfpi: trouble space was built on a different operator");
  const DfpiVariant variant = opts.variant;
  if (recruiter && variant != DfpiVariant::pre_projection)
    throw std::invalid_argument(std::string("dfpi: dynamic recruitment requires pre_projection, not ") +
                                to_string(variant));

  SolveResult out;
  SolverTrace& trace = out.trace;
  const double target = opts.rel_tol * norm2(b);
  Vector x(x0.begin(), x0.end());
  Vector r = subtract(b, matvec(a, x));
  const auto finite = [](double v) { return std::isfinite(v); };

  trace.add(0, norm2(r), ts.size());
  if (variant == DfpiVariant::init_projection && !ts.empty()) {
    const Vector alpha = ts.coefficients(r);
    axpy(1.0, ts.combine_basis(alpha), x);
    axpy(-1.0, ts.combine_images(alpha), r);
    trace.add(0.5, norm2(r), ts.size(), "init_projection");
  }
  if (opts.keep_history) out.iterates.push_back(x);
  if (norm2(r) <= target) {
    trace.status = SolveStatus::converged;
    out.x = std::move(x);
    return out;
  }

  const auto half = [&](std::size_t k, const Vector& xh, double rh_norm, const char* ev) {
    // With nothing to project the half-step repeats the full step.
    if (opts.record_halves && !ts.empty()) trace.add(k + 0.5, rh_norm, ts.size(), ev);
    if (opts.keep_history) out.half_iterates.push_back(xh);
  };
  const auto converged_at = [&](const Vector& cand, double claimed) {
    // Half-step residuals come from a recurrence; confirm before stopping.
    return claimed <= target && norm2(subtract(b, matvec(a, cand))) <= target;
  };

  trace.status = SolveStatus::max_iter;
  for (std::size_t k = 0; k < opts.max_iter; ++k) {
    Vector xn;
    bool done = false;
    switch (variant) {
      case DfpiVariant::pre_projection: {
        const Vector alpha = ts.coefficients(r);
        Vector xh = add(x, ts.combine_basis(alpha));
        const Vector rh = subtract(r, ts.combine_images(alpha));
        const double rhn = norm2(rh);
        half(k, xh, rhn, "");
        if (!finite(rhn)) break;
        if (converged_at(xh, rhn)) {
          x = std::move(xh);
          done = true;
          break;
        }
        xn = add(xh, p.apply(rh));
        break;
      }
      case DfpiVariant::final_correction: {
        const Vector alpha = ts.coefficients(r);
        const Vector rc = subtract(r, ts.combine_images(alpha));
        const Vector xc = add(x, ts.combine_basis(alpha));
        const double rcn = norm2(rc);
        half(k, xc, rcn, "corrected");
        if (!finite(rcn)) break;
        if (converged_at(xc, rcn)) {
          x = xc;
          done = true;
          break;
        }
        xn = add(x, p.apply(rc));
        break;
      }
      case DfpiVariant::post_projection: {
        Vector xh = add(x, p.apply(r));
        Vector rh = subtract(b, matvec(a, xh));
        const double rhn = norm2(rh);
        half(k, xh, rhn, "");
        if (!finite(rhn)) break;
        if (rhn <= target) {
          x = std::move(xh);
          done = true;
          break;
        }
        const Vector alpha = ts.coefficients(rh);
        xn = add(xh, ts.combine_basis(alpha));
        break;
      }
      case DfpiVariant::init_projection: {
        const Vector u = p.apply(r);
        xn = add(x, u);
        axpy(-1.0, ts.apply_QR(u), xn);
        break;
      }
    }
    if (done) {
      trace.status = SolveStatus::converged;
      trace.iterations = k;
      break;
    }
    if (xn.empty() || !all_finite(xn)) {
      trace.status = SolveStatus::breakdown;
      trace.message = "non-finite value at step " + std::to_string(k + 1);
      break;
    }
    Vector rn = subtract(b, matvec(a, xn));
    const double rnn = norm2(rn);
    if (!finite(rnn)) {
      trace.status = SolveStatus::breakdown;
      trace.message = "non-finite residual at step " + std::to_string(k + 1);
      break;
    }
    std::string tag;
    if (recruiter) tag = recruiter->record_increment(subtract(xn, x), ts);
    x = std::move(xn);
    r = std::move(rn);
    trace.iterations = k + 1;
    trace.add(static_cast<double>(k + 1), rnn, ts.size(), std::move(tag));
    if (opts.keep_history) out.iterates.push_back(x);
    if (rnn <= target) {
      trace.status = SolveStatus::converged;
      break;
    }
  }

  if (variant == DfpiVariant::final_correction && trace.status != SolveStatus::converged &&
      !ts.empty() && all_finite(r)) {
    const Vector alpha = ts.coefficients(r);
    axpy(1.0, ts.combine_basis(alpha), x);
    axpy(-1.0, ts.combine_images(alpha), r);
    trace.add(trace.records.back().iter + 0.5, norm2(r), ts.size(), "final_correction");
  }
  out.x = std::move(x);
  return out;
}

}  // namespace

SolveResult dfpi_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                       const Preconditioner& p, const TroubleSpace& ts, const SolverOptions& opts) {
  // The static path never mutates the space.
  return run(a, b, x0, p, const_cast<TroubleSpace&>(ts), nullptr, opts);
}

SolveResult dfpi_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                       const Preconditioner& p, TroubleSpace& ts, Recruiter& recruiter,
                       const SolverOptions& opts) {
  return run(a, b, x0, p, ts, &recruiter, opts);
}

IterationMatrix build_iteration_matrix_N(const DenseMatrix& a, const Preconditioner& p,
                                         const TroubleSpace& ts) {
  const std::size_t n = a.rows();
  const DenseMatrix q = explicit_projector(ts, a);
  const DenseMatrix m = preconditioned_operator(p, a);
  const DenseMatrix id = DenseMatrix::identity(n);
  IterationMatrix out;
  out.n = q + m * (id - q);
  out.id_minus_n = id - out.n;
  return out;
}

NonsingularityReport check_N_nonsingular(const DenseMatrix& a, const Preconditioner& p,
                                         const TroubleSpace& ts) {
  NonsingularityReport rep;
  if (ts.empty()) {
    // N = P^-1 A, nonsingular with A.
    rep.ok = rep.invariant = rep.core_nonsingular = true;
    rep.core_sigma_ratio = 1.0;
    return rep;
  }
  const std::size_t m = ts.size();
  // Condition (i): residual of P^-1 A Q after projecting back on Q.
  DenseMatrix defect(a.rows(), m);
  double scale = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const Vector bq = p.apply(matvec(a, ts.basis()[j]));
    scale = std::max(scale, norm2(bq));
    defect.set_column(j, orthogonalize_against(ts.basis(), bq).vector);
  }
  rep.invariance_defect = spectral_norm(defect);
  rep.invariant = rep.invariance_defect <= 1e-10 * std::max(scale, 1.0);

  // Condition (ii): Y^T P Z.
  const auto y = ts.test_basis();
  DenseMatrix ypz(m, m);
  for (std::size_t j = 0; j < m; ++j) {
    const Vector pz = p.multiply(ts.basis()[j]);
    for (std::size_t i = 0; i < m; ++i) ypz(i, j) = dot(y[i], pz);
  }
  const SvdResult s = svd(ypz);
  const double smax = s.values.front(), smin = s.values.back();
  rep.core_sigma_ratio = smax > 0.0 ? smin / smax : 0.0;
  rep.core_nonsingular = rep.core_sigma_ratio > 1e-12;
  if (!rep.core_nonsingular) rep.witness = s.v.column(m - 1);
  rep.ok = rep.invariant || rep.core_nonsingular;
  return rep;
}

}  // namespace dfpi
