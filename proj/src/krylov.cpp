#include "dfpi/krylov.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dfpi/vector_ops.hpp"

namespace dfpi {

void KrylovOptions::validate() const {
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  if (restart && *restart < 1) throw std::invalid_argument("restart must be at least 1");
}

namespace {

// A rho or pivot below eps^2 relative to its factors is treated as zero.
// Anything larger is kept: near-breakdowns in BiCG-type recurrences are
// often recovered from.
constexpr double breakdown_tol = 4.9e-32;

// Shared start-up: validation, x0 copy, initial record.
struct Start {
  Vector x;
  Vector r;
  double target;
};

Start begin(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
            const Preconditioner& p, const KrylovOptions& opts, SolveResult& out) {
  opts.validate();
  if (a.rows() != a.cols()) throw std::invalid_argument("krylov: matrix must be square");
  require_same_size(b.size(), a.rows(), "krylov right-hand side");
  require_same_size(x0.size(), a.rows(), "krylov initial guess");
  require_same_size(p.size(), a.rows(), "krylov preconditioner");
  Start s{Vector(x0.begin(), x0.end()), {}, opts.rel_tol * norm2(b)};
  s.r = subtract(b, matvec(a, s.x));
  out.trace.add(0, norm2(s.r), 0);
  if (opts.keep_history) out.iterates.push_back(s.x);
  return s;
}

double true_residual(const SparseMatrix& a, std::span<const double> b, std::span<const double> x) {
  return norm2(subtract(b, matvec(a, x)));
}

void finish_breakdown(SolveResult& out, const std::string& what, std::size_t step) {
  out.trace.status = SolveStatus::breakdown;
  out.trace.message = what + " at step " + std::to_string(step);
}

}  // namespace

SolveResult gmres_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                        const Preconditioner& p, const KrylovOptions& opts) {
  SolveResult out;
  Start s = begin(a, b, x0, p, opts, out);
  Vector x = std::move(s.x);
  if (norm2(s.r) <= s.target) {
    out.trace.status = SolveStatus::converged;
    out.x = std::move(x);
    return out;
  }
  const std::size_t cycle_len = opts.restart.value_or(opts.max_iter);
  std::size_t k = 0;
  Vector r = std::move(s.r);
  while (k < opts.max_iter) {
    Vector z = p.apply(r);
    const double beta = norm2(z);
    if (!std::isfinite(beta)) {
      finish_breakdown(out, "non-finite preconditioned residual", k);
      break;
    }
    if (beta == 0.0) {
      // P^-1 r = 0 with r != 0 cannot happen for an invertible P.
      finish_breakdown(out, "zero preconditioned residual", k);
      break;
    }
    const Vector x_cycle = x;
    std::vector<Vector> v{scaled(1.0 / beta, z)};
    std::vector<std::vector<double>> h;  // column j holds h(0..j+1, j) after rotation
    std::vector<double> cs, sn, g{beta};
    bool stop = false;
    for (std::size_t j = 0; j < cycle_len && k < opts.max_iter; ++j) {
      Vector w = p.apply(matvec(a, v[j]));
      std::vector<double> col(j + 2, 0.0);
      for (std::size_t i = 0; i <= j; ++i) {
        col[i] = dot(w, v[i]);
        axpy(-col[i], v[i], w);
      }
      col[j + 1] = norm2(w);
      const double hnext = col[j + 1];
      for (std::size_t i = 0; i < j; ++i) {
        const double t = cs[i] * col[i] + sn[i] * col[i + 1];
        col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
        col[i] = t;
      }
      const double den = std::hypot(col[j], col[j + 1]);
      const double c = den == 0.0 ? 1.0 : col[j] / den;
      const double sgn = den == 0.0 ? 0.0 : col[j + 1] / den;
      cs.push_back(c);
      sn.push_back(sgn);
      col[j] = den;
      col[j + 1] = 0.0;
      g.push_back(-sgn * g[j]);
      g[j] *= c;
      h.push_back(std::move(col));

      // y = R^-1 g over the first j+1 entries.
      std::vector<double> y(j + 1);
      for (std::size_t i = j + 1; i-- > 0;) {
        double acc = g[i];
        for (std::size_t l = i + 1; l <= j; ++l) acc -= h[l][i] * y[l];
        y[i] = acc / h[i][i];
      }
      x = x_cycle;
      for (std::size_t i = 0; i <= j; ++i) axpy(y[i], v[i], x);
      ++k;
      r = subtract(b, matvec(a, x));
      const double rn = norm2(r);
      if (!std::isfinite(rn) || !all_finite(x)) {
        finish_breakdown(out, "non-finite iterate", k);
        stop = true;
        break;
      }
      out.trace.add(static_cast<double>(k), rn, 0);
      out.trace.iterations = k;
      if (opts.keep_history) out.iterates.push_back(x);
      if (rn <= s.target) {
        out.trace.status = SolveStatus::converged;
        stop = true;
        break;
      }
      if (hnext <= 1e-14 * beta) break;  // happy breakdown; restart from x
      v.push_back(scaled(1.0 / hnext, w));
    }
    if (stop) break;
  }
  out.x = std::move(x);
  return out;
}

SolveResult cg_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                     const Preconditioner& p, const KrylovOptions& opts) {
  {
    if (a.asymmetry() > 1e-10 * a.frobenius_norm()) throw std::invalid_argument("cg: matrix is not symmetric");
    std::mt19937_64 gen(12345);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector s(a.rows()), t(a.rows());
    for (auto& e : s) e = u(gen);
    for (auto& e : t) e = u(gen);
    const double st = dot(s, p.apply(t)), ts = dot(t, p.apply(s));
    if (std::abs(st - ts) > 1e-10 * std::max({1.0, std::abs(st), std::abs(ts)}))
      throw std::invalid_argument("cg: preconditioner is not symmetric");
  }
  SolveResult out;
  Start s = begin(a, b, x0, p, opts, out);
  Vector x = std::move(s.x), r = std::move(s.r);
  if (norm2(r) <= s.target) {
    out.trace.status = SolveStatus::converged;
    out.x = std::move(x);
    return out;
  }
  Vector z = p.apply(r);
  Vector d = z;
  double rho = dot(r, z);
  for (std::size_t k = 0; k < opts.max_iter; ++k) {
    const Vector q = matvec(a, d);
    const double dq = dot(d, q);
    if (!(dq > 0.0)) {
      finish_breakdown(out, dq == 0.0 ? "zero curvature" : "non-positive curvature", k + 1);
      break;
    }
    const double alpha = rho / dq;
    axpy(alpha, d, x);
    axpy(-alpha, q, r);
    const double rn = norm2(r);
    if (!std::isfinite(rn)) {
      finish_breakdown(out, "non-finite residual", k + 1);
      break;
    }
    out.trace.add(static_cast<double>(k + 1), rn, 0);
    out.trace.iterations = k + 1;
    if (opts.keep_history) out.iterates.push_back(x);
    if (rn <= s.target && true_residual(a, b, x) <= s.target) {
      out.trace.status = SolveStatus::converged;
      break;
    }
    z = p.apply(r);
    const double rho_next = dot(r, z);
    const double beta = rho_next / rho;
    rho = rho_next;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = z[i] + beta * d[i];
  }
  out.x = std::move(x);
  return out;
}

SolveResult bicg_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                       const Preconditioner& p, const KrylovOptions& opts) {
  SolveResult out;
  Start s = begin(a, b, x0, p, opts, out);
  Vector x = std::move(s.x), r = std::move(s.r);
  if (norm2(r) <= s.target) {
    out.trace.status = SolveStatus::converged;
    out.x = std::move(x);
    return out;
  }
  const SparseMatrix at = a.transposed();
  Vector rt = r;
  Vector d, dt;
  double rho_prev = 0.0;
  for (std::size_t k = 0; k < opts.max_iter; ++k) {
    const Vector z = p.apply(r);
    const Vector zt = p.apply_transpose(rt);
    const double rho = dot(z, rt);
    if (std::abs(rho) <= breakdown_tol * norm2(z) * norm2(rt)) {
      finish_breakdown(out, "rho vanished", k + 1);
      break;
    }
    if (k == 0) {
      d = z;
      dt = zt;
    } else {
      const double beta = rho / rho_prev;
      for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = z[i] + beta * d[i];
        dt[i] = zt[i] + beta * dt[i];
      }
    }
    rho_prev = rho;
    const Vector q = matvec(a, d);
    const Vector qt = matvec(at, dt);
    const double piv = dot(dt, q);
    if (std::abs(piv) <= breakdown_tol * norm2(dt) * norm2(q)) {
      finish_breakdown(out, "pivot vanished", k + 1);
      break;
    }
    const double alpha = rho / piv;
    axpy(alpha, d, x);
    axpy(-alpha, q, r);
    axpy(-alpha, qt, rt);
    const double rn = norm2(r);
    if (!std::isfinite(rn)) {
      finish_breakdown(out, "non-finite residual", k + 1);
      break;
    }
    out.trace.add(static_cast<double>(k + 1), rn, 0);
    out.trace.iterations = k + 1;
    if (opts.keep_history) out.iterates.push_back(x);
    if (rn <= s.target && true_residual(a, b, x) <= s.target) {
      out.trace.status = SolveStatus::converged;
      break;
    }
  }
  out.x = std::move(x);
  return out;
}

SolveResult bicgstab_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                           const Preconditioner& p, const KrylovOptions& opts) {
  SolveResult out;
  Start s = begin(a, b, x0, p, opts, out);
  Vector x = std::move(s.x), r = std::move(s.r);
  if (norm2(r) <= s.target) {
    out.trace.status = SolveStatus::converged;
    out.x = std::move(x);
    return out;
  }
  const Vector rhat = r;
  Vector v(r.size(), 0.0), d(r.size(), 0.0);
  double rho_prev = 1.0, alpha = 1.0, omega = 1.0;
  for (std::size_t k = 0; k < opts.max_iter; ++k) {
    const double rho = dot(rhat, r);
    if (std::abs(rho) <= breakdown_tol * norm2(rhat) * norm2(r)) {
      finish_breakdown(out, "rho vanished", k + 1);
      break;
    }
    if (k == 0) {
      d = r;
    } else {
      const double beta = (rho / rho_prev) * (alpha / omega);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = r[i] + beta * (d[i] - omega * v[i]);
    }
    rho_prev = rho;
    const Vector dh = p.apply(d);
    v = matvec(a, dh);
    const double rv = dot(rhat, v);
    if (std::abs(rv) <= breakdown_tol * norm2(rhat) * norm2(v)) {
      finish_breakdown(out, "pivot vanished", k + 1);
      break;
    }
    alpha = rho / rv;
    Vector sres = r;
    axpy(-alpha, v, sres);
    axpy(alpha, dh, x);
    const double sn = norm2(sres);
    if (!std::isfinite(sn)) {
      finish_breakdown(out, "non-finite residual", k + 1);
      break;
    }
    out.trace.add(k + 0.5, sn, 0, "half");
    if (opts.keep_history) out.half_iterates.push_back(x);
    if (sn <= s.target && true_residual(a, b, x) <= s.target) {
      out.trace.status = SolveStatus::converged;
      out.trace.iterations = k;
      break;
    }
    const Vector sh = p.apply(sres);
    const Vector t = matvec(a, sh);
    const double tt = dot(t, t);
    omega = tt > 0.0 ? dot(t, sres) / tt : 0.0;
    if (omega == 0.0) {
      finish_breakdown(out, "omega vanished", k + 1);
      break;
    }
    axpy(omega, sh, x);
    r = std::move(sres);
    axpy(-omega, t, r);
    const double rn = norm2(r);
    if (!std::isfinite(rn)) {
      finish_breakdown(out, "non-finite residual", k + 1);
      break;
    }
    out.trace.add(static_cast<double>(k + 1), rn, 0);
    out.trace.iterations = k + 1;
    if (opts.keep_history) out.iterates.push_back(x);
    if (rn <= s.target && true_residual(a, b, x) <= s.target) {
      out.trace.status = SolveStatus::converged;
      break;
    }
  }
  out.x = std::move(x);
  return out;
}

SolveResult richardson_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                             const Preconditioner& p, const KrylovOptions& opts) {
  SolveResult out;
  Start s = begin(a, b, x0, p, opts, out);
  Vector x = std::move(s.x), r = std::move(s.r);
  const double r0 = norm2(r);
  if (r0 <= s.target) {
    out.trace.status = SolveStatus::converged;
    out.x = std::move(x);
    return out;
  }
  for (std::size_t k = 0; k < opts.max_iter; ++k) {
    Vector xn = add(x, p.apply(r));
    Vector rn = subtract(b, matvec(a, xn));
    const double rnn = norm2(rn);
    if (!std::isfinite(rnn) || !all_finite(xn)) {
      finish_breakdown(out, "non-finite residual", k + 1);
      break;
    }
    x = std::move(xn);
    r = std::move(rn);
    out.trace.add(static_cast<double>(k + 1), rnn, 0);
    out.trace.iterations = k + 1;
    if (opts.keep_history) out.iterates.push_back(x);
    if (rnn <= s.target) {
      out.trace.status = SolveStatus::converged;
      break;
    }
  }
  if (out.trace.status != SolveStatus::converged) {
    const double last = out.trace.final_residual();
    if (last > r0) {
      std::ostringstream msg;
      if (!out.trace.message.empty()) msg << out.trace.message << "; ";
      msg << "residual grew from " << r0 << " to " << last;
      out.trace.message = msg.str();
    }
  }
  out.x = std::move(x);
  return out;
}

}  // namespace dfpi
