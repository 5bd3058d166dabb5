#include "dfpi/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dfpi/dense_decomp.hpp"
#include "dfpi/orthogonalize.hpp"
#include "dfpi/vector_ops.hpp"

namespace dfpi {

const char* to_string(VerifyMode m) {
  switch (m) {
    case VerifyMode::galerkin: return "galerkin";
    case VerifyMode::lsq_a: return "lsq-a";
    case VerifyMode::lsq_pa: return "lsq-pa";
    case VerifyMode::orthogonal: return "orthogonal";
  }
  return "?";
}

namespace {

void require_square(const DenseMatrix& a, const Preconditioner& p) {
  if (!a.square()) throw std::invalid_argument("spectral: matrix must be square");
  if (p.size() != a.rows()) throw std::invalid_argument("spectral: preconditioner size mismatch");
}

DenseMatrix apply_columns(const DenseMatrix& x, auto&& f) {
  std::vector<Vector> cols = x.columns();
  for (auto& c : cols) c = f(c);
  if (cols.empty()) return DenseMatrix(x.rows(), 0);
  return DenseMatrix::from_columns(cols);
}

// Y for each mode, against the orthonormal basis z (n x m).
DenseMatrix test_basis(const DenseMatrix& a, const Preconditioner& p, const DenseMatrix& z,
                       VerifyMode mode) {
  switch (mode) {
    case VerifyMode::galerkin: return z;
    case VerifyMode::lsq_a: return a * z;
    case VerifyMode::lsq_pa:
      return apply_columns(a * z, [&](const Vector& c) { return p.apply_transpose(p.apply(c)); });
    case VerifyMode::orthogonal: return inverse(a).transposed() * z;
  }
  throw std::logic_error("unknown verify mode");
}

double two_norm_of(const DenseMatrix& a) { return a.rows() == 0 || a.cols() == 0 ? 0.0 : spectral_norm(a); }

ComplexVector apply_complex(const DenseMatrix& m, const ComplexVector& v) {
  Vector re(v.size()), im(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    re[i] = v[i].real();
    im[i] = v[i].imag();
  }
  const Vector mr = matvec(m, re), mi = matvec(m, im);
  ComplexVector out(mr.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {mr[i], mi[i]};
  return out;
}

double norm_c(const ComplexVector& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

// Distance of a complex vector from span(basis), relative to its length.
double outside_fraction(std::span<const Vector> basis, const ComplexVector& v) {
  Vector re(v.size()), im(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    re[i] = v[i].real();
    im[i] = v[i].imag();
  }
  const double r1 = orthogonalize_against(basis, re).norm;
  const double r2 = orthogonalize_against(basis, im).norm;
  const double len = norm_c(v);
  return len > 0.0 ? std::hypot(r1, r2) / len : 0.0;
}

// 2-norm condition number of a complex matrix given by columns, through
// the real 2n x 2n embedding [[Re, -Im], [Im, Re]], whose singular values
// are those of the complex matrix, each repeated.
double complex_condition(const std::vector<ComplexVector>& cols) {
  const std::size_t n = cols.size();
  DenseMatrix e(2 * n, 2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const Complex c = cols[j][i];
      e(i, j) = c.real();
      e(i, n + j) = -c.imag();
      e(n + i, j) = c.imag();
      e(n + i, n + j) = c.real();
    }
  }
  return condition_number_2(e);
}

}  // namespace

DenseMatrix dense_projector(const DenseMatrix& a, const Preconditioner& p,
                            std::span<const Vector> z, VerifyMode mode) {
  require_square(a, p);
  const std::size_t n = a.rows();
  const DenseMatrix zb = orthonormal_columns(z);
  if (zb.cols() == 0) return DenseMatrix(n, n);
  const DenseMatrix yt = test_basis(a, p, zb, mode).transposed();
  const DenseMatrix yta = yt * a;
  return zb * solve(yta * zb, yta);
}

DenseMatrix dense_iteration_matrix(const DenseMatrix& a, const Preconditioner& p,
                                   std::span<const Vector> z, VerifyMode mode) {
  const DenseMatrix q = dense_projector(a, p, z, mode);
  const DenseMatrix id = DenseMatrix::identity(a.rows());
  return q + preconditioned_operator(p, a) * (id - q);
}

std::vector<Vector> dominant_invariant_subspace(const DenseMatrix& m, std::size_t count) {
  if (count == 0) return {};
  if (count > m.rows()) throw std::invalid_argument("dominant_invariant_subspace: count exceeds dimension");
  const Eigendecomposition ed = dense_eig(m, true);
  std::vector<std::size_t> order(ed.values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::abs(1.0 - ed.values[i]) > std::abs(1.0 - ed.values[j]);
  });
  std::vector<Vector> raw;
  std::vector<bool> used(order.size(), false);
  std::size_t taken = 0;
  for (std::size_t k = 0; k < order.size() && taken < count; ++k) {
    const std::size_t i = order[k];
    if (used[i]) continue;
    const ComplexVector& v = ed.vectors[i];
    Vector re(v.size()), im(v.size());
    for (std::size_t r = 0; r < v.size(); ++r) {
      re[r] = v[r].real();
      im[r] = v[r].imag();
    }
    used[i] = true;
    raw.push_back(re);
    ++taken;
    if (ed.values[i].imag() != 0.0) {
      // Take the partner too, even past the requested count.
      for (std::size_t j = 0; j < ed.values.size(); ++j) {
        if (!used[j] && std::abs(ed.values[j] - std::conj(ed.values[i])) <=
                            1e-10 * std::max(1.0, std::abs(ed.values[i]))) {
          used[j] = true;
          break;
        }
      }
      raw.push_back(im);
      ++taken;
    }
  }
  return mgs_orthonormalize(raw).basis;
}

double invariance_measure(const DenseMatrix& a, const Preconditioner& p,
                          std::span<const Vector> z) {
  require_square(a, p);
  const auto q = mgs_orthonormalize(z).basis;
  if (q.empty()) return 0.0;
  DenseMatrix defect(a.rows(), q.size());
  for (std::size_t j = 0; j < q.size(); ++j)
    defect.set_column(j, orthogonalize_against(q, p.apply(matvec(a, q[j]))).vector);
  return spectral_norm(defect);
}

SpectralReport spectrum_comparison(const DenseMatrix& a, const Preconditioner& p,
                                   std::span<const Vector> z, VerifyMode mode) {
  require_square(a, p);
  const std::size_t n = a.rows();
  const DenseMatrix id = DenseMatrix::identity(n);
  const DenseMatrix m = preconditioned_operator(p, a);
  const DenseMatrix q = dense_projector(a, p, z, mode);
  const DenseMatrix nmat = q + m * (id - q);
  const auto basis = mgs_orthonormalize(z).basis;

  SpectralReport rep;
  rep.spectrum_m = dense_eig(m).values;
  rep.spectrum_n = dense_eig(nmat).values;
  rep.spectrum_id_minus_n = dense_eig(id - nmat).values;
  rep.deflated_count = basis.size();
  rep.invariance_defect = invariance_measure(a, p, z);
  rep.nonsingular_i = rep.invariance_defect <= invariance_threshold * std::max(1.0, two_norm_of(m));

  if (!basis.empty()) {
    const DenseMatrix zb = DenseMatrix::from_columns(basis);
    const DenseMatrix y = test_basis(a, p, zb, mode);
    const DenseMatrix ypz = y.transposed() * apply_columns(zb, [&](const Vector& c) { return p.multiply(c); });
    const auto s = singular_values(ypz);
    rep.nonsingular_ii = s.front() > 0.0 && s.back() / s.front() > 1e-12;
  } else {
    rep.nonsingular_ii = true;
  }

  // The deflated part of Sp(P^-1 A) is the spectrum of its restriction to Z.
  Spectrum id_minus_m(rep.spectrum_m.size());
  for (std::size_t i = 0; i < id_minus_m.size(); ++i) id_minus_m[i] = 1.0 - rep.spectrum_m[i];
  Spectrum restricted;
  if (!basis.empty()) {
    const DenseMatrix zb = DenseMatrix::from_columns(basis);
    for (const Complex& mu : dense_eig(zb.transposed() * m * zb).values) restricted.push_back(1.0 - mu);
  }
  Spectrum kept = remove_matched(id_minus_m, restricted);
  rep.max_nondeflated_modulus = spectral_radius(kept);
  rep.predicted_id_minus_n.assign(basis.size(), Complex(0.0, 0.0));
  rep.predicted_id_minus_n.insert(rep.predicted_id_minus_n.end(), kept.begin(), kept.end());

  rep.hausdorff = hausdorff_distance(rep.predicted_id_minus_n, rep.spectrum_id_minus_n);
  rep.matching = matching_distance(rep.predicted_id_minus_n, rep.spectrum_id_minus_n);
  rep.checked = rep.nonsingular_i;
  rep.pass = rep.checked && rep.matching <= spectrum_match_tol && rep.hausdorff <= spectrum_match_tol;
  return rep;
}

BauerFikeReport bauer_fike_check(const DenseMatrix& a, const Preconditioner& p,
                                 std::span<const Vector> z_exact, std::span<const Vector> deltas,
                                 VerifyMode mode) {
  require_square(a, p);
  if (deltas.size() != z_exact.size())
    throw std::invalid_argument("bauer_fike_check: one delta per trouble vector");
  const std::size_t n = a.rows();
  const DenseMatrix id = DenseMatrix::identity(n);
  const DenseMatrix m = preconditioned_operator(p, a);
  const auto basis = mgs_orthonormalize(z_exact).basis;
  const DenseMatrix qt = dense_projector(a, p, z_exact, mode);
  const DenseMatrix nt = qt + m * (id - qt);

  std::vector<Vector> z_pert(z_exact.begin(), z_exact.end());
  for (std::size_t k = 0; k < z_pert.size(); ++k) {
    require_same_size(deltas[k].size(), n, "bauer_fike_check delta");
    z_pert[k] = add(z_pert[k], deltas[k]);
  }
  const DenseMatrix nmat = dense_iteration_matrix(a, p, z_pert, mode);

  BauerFikeReport rep;
  rep.delta_n_norm = spectral_norm(nmat - nt);

  // Eigenvectors of N_T: the basis of Z (eigenvalue 1), and for each
  // eigenpair (lambda, eps) of M outside Z, (Id - Q) eps + Q M (Id - Q) eps / (lambda - 1).
  const Eigendecomposition ed = dense_eig(m, true);
  const std::size_t mdim = basis.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> outside(n);
  for (std::size_t i = 0; i < n; ++i) outside[i] = outside_fraction(basis, ed.vectors[i]);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return outside[i] < outside[j]; });

  std::vector<ComplexVector> vcols;
  Spectrum nt_values;
  for (const auto& zv : basis) {
    vcols.emplace_back(zv.begin(), zv.end());
    nt_values.emplace_back(1.0, 0.0);
  }
  const DenseMatrix iq = id - qt;
  const DenseMatrix qmiq = qt * m * iq;
  double lam = 0.0;
  bool ok = ed.all_converged();
  for (std::size_t k = mdim; k < n && ok; ++k) {
    const std::size_t i = order[k];
    const Complex lambda = ed.values[i];
    if (std::abs(lambda - 1.0) < 1e-12) {
      rep.note = "unit eigenvalue of P^-1 A outside Z";
      ok = false;
      break;
    }
    ComplexVector e = apply_complex(iq, ed.vectors[i]);
    const ComplexVector corr = apply_complex(qmiq, ed.vectors[i]);
    for (std::size_t r = 0; r < n; ++r) e[r] += corr[r] / (lambda - 1.0);
    vcols.push_back(std::move(e));
    nt_values.push_back(lambda);
    lam = std::max(lam, std::abs(1.0 - lambda));
  }
  if (ok) {
    // The assembled matrix must actually diagonalize N_T.
    double res = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < vcols.size(); ++k) {
      const ComplexVector nv = apply_complex(nt, vcols[k]);
      double r2 = 0.0;
      for (std::size_t r = 0; r < n; ++r) r2 += std::norm(nv[r] - nt_values[k] * vcols[k][r]);
      res = std::max(res, std::sqrt(r2));
      scale = std::max(scale, norm_c(vcols[k]));
    }
    rep.kappa = complex_condition(vcols);
    ok = res <= 1e-8 * std::max(1.0, two_norm_of(nt)) * scale && std::isfinite(rep.kappa) &&
         rep.kappa < 1e12;
    if (!ok && rep.note.empty()) rep.note = "eigenvector matrix of N_T not certified";
  } else if (rep.note.empty()) {
    rep.note = "eigensolver did not converge";
  }
  rep.diagonalizable = ok;
  rep.lambda = lam;
  if (!ok) {
    rep.kappa = std::numeric_limits<double>::infinity();
    return rep;
  }

  const double radius = rep.kappa * rep.delta_n_norm;
  rep.bound = lam + radius;
  const Spectrum sp_n = dense_eig(nmat).values;
  for (const Complex& mu : sp_n) {
    double best = std::numeric_limits<double>::infinity();
    for (const Complex& l : nt_values) best = std::min(best, std::abs(mu - l));
    rep.max_drift = std::max(rep.max_drift, best);
  }
  rep.drift_ok = rep.max_drift <= radius + 1e-9;
  rep.observed_rho = spectral_radius(dense_eig(id - nmat).values);
  rep.rho_ok = rep.observed_rho <= rep.bound + 1e-9;
  rep.premise = 1.0 - lam > radius;
  rep.rho_n = spectral_radius(sp_n);
  double lam_n = 0.0;
  for (std::size_t k = mdim; k < nt_values.size(); ++k) lam_n = std::max(lam_n, std::abs(nt_values[k]));
  rep.raw_reading_holds = rep.rho_n <= lam_n + radius + 1e-9;
  return rep;
}

JordanChainReport jordan_chain_check(const JordanSpec& spec,
                                     std::span<const std::size_t> prefix, VerifyMode mode) {
  if (prefix.size() != spec.blocks.size())
    throw std::invalid_argument("jordan_chain_check: one prefix length per block");
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (prefix[i] > spec.blocks[i].size)
      throw std::invalid_argument("jordan_chain_check: prefix longer than its block");
    if (prefix[i] > 0 && spec.blocks[i].lambda == 1.0)
      throw std::invalid_argument("jordan_chain_check: unit eigenvalue with a deflated prefix");
  }
  const JordanMatrix jm = gen_jordan(spec);
  const std::size_t n = jm.m.rows();
  const DenseMatrix& m = jm.m;
  const Preconditioner p = Preconditioner::identity(n);

  std::vector<Vector> z;
  std::size_t off = 0;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    for (std::size_t k = 0; k < prefix[i]; ++k) z.push_back(jm.v.column(off + k));
    off += spec.blocks[i].size;
  }
  const DenseMatrix id = DenseMatrix::identity(n);
  const DenseMatrix q = dense_projector(m, p, z, mode);
  const DenseMatrix iq = id - q;
  const DenseMatrix nmat = q + m * iq;
  const DenseMatrix qmiq = q * m * iq;
  const double nnorm = spectral_norm(nmat);

  JordanChainReport rep;
  auto record = [&](std::size_t block, std::size_t index, bool in_z, const Vector& lhs,
                    const Vector& rhs, double scale) {
    const double r = norm2(subtract(lhs, rhs)) / std::max(scale, 1e-300);
    rep.residuals.push_back({block, index, in_z, r});
    rep.max_residual = std::max(rep.max_residual, r);
  };

  off = 0;
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    const double lambda = spec.blocks[i].lambda;
    const std::size_t size = spec.blocks[i].size;
    auto eps = [&](std::size_t k) { return jm.v.column(off + k); };
    for (std::size_t k = 0; k < prefix[i]; ++k) {
      const Vector e = eps(k);
      record(i, k, true, matvec(nmat, e), e, nnorm * norm2(e));
    }
    if (prefix[i] < size && lambda != 1.0) {
      // Chain of N starting at the first vector outside Z.
      const std::size_t s = prefix[i];
      Vector zk = scaled(1.0 / (lambda - 1.0), matvec(qmiq, eps(s)));
      Vector e = add(matvec(iq, eps(s)), zk);
      record(i, s, false, matvec(nmat, e), scaled(lambda, e), nnorm * norm2(e));
      for (std::size_t k = s + 1; k < size; ++k) {
        zk = scaled(1.0 / (1.0 - lambda), subtract(zk, matvec(qmiq, eps(k))));
        Vector en = add(matvec(iq, eps(k)), zk);
        record(i, k, false, matvec(nmat, en), add(scaled(lambda, en), e),
               nnorm * norm2(en) + norm2(e));
        e = std::move(en);
      }
    } else if (prefix[i] < size) {
      // Unit eigenvalue, nothing deflated: built from the top of the chain
      // down, e_k = (Id - Q) eps_k + Q M (Id - Q) eps_{k+1}.
      std::vector<Vector> e(size);
      for (std::size_t k = 0; k < size; ++k) {
        e[k] = matvec(iq, eps(k));
        if (k + 1 < size) e[k] = add(e[k], matvec(qmiq, eps(k + 1)));
      }
      for (std::size_t k = 1; k < size; ++k)
        record(i, k, false, matvec(nmat, e[k]), add(e[k], e[k - 1]), nnorm * norm2(e[k]) + norm2(e[k - 1]));
      // N e_0 - e_0 = Q M (Id - Q) eps_0 lies in Z.
      const Vector w = matvec(qmiq, eps(0));
      record(i, 0, false, matvec(nmat, e[0]), add(e[0], w), nnorm * norm2(e[0]));
    }
    off += size;
  }

  rep.spectrum_n = dense_eig(nmat).values;
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    for (std::size_t k = 0; k < spec.blocks[i].size; ++k)
      rep.predicted_n.emplace_back(k < prefix[i] ? 1.0 : spec.blocks[i].lambda, 0.0);
  }
  rep.spectrum_distance = matching_distance(rep.predicted_n, rep.spectrum_n);
  rep.pass = rep.max_residual <= chain_tol;
  return rep;
}

}  // namespace dfpi
