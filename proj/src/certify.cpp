#include "dfpi/certify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dfpi/dense_decomp.hpp"
#include "dfpi/dfpi.hpp"
#include "dfpi/eigen.hpp"
#include "dfpi/krylov.hpp"
#include "dfpi/orthogonalize.hpp"
#include "dfpi/problems.hpp"
#include "dfpi/recruitment.hpp"
#include "dfpi/spectral.hpp"
#include "dfpi/vector_ops.hpp"

namespace dfpi {

std::size_t CertifyConfig::grid_side() const {
  return std::max<std::size_t>(3, (16 * n + 25) / 50);
}

std::size_t CertifyConfig::krylov_steps() const { return std::min<std::size_t>(15, cd1d_n() / 2); }

bool CriterionResult::pass() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

CheckResult make_check(std::string name, double measured, double tolerance,
                       const CertifyConfig& cfg, std::string detail) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = measured;
  c.tolerance = tolerance * cfg.tolerance_scale;
  c.pass = measured <= c.tolerance;  // NaN fails
  c.detail = std::move(detail);
  return c;
}

namespace {

constexpr VerifyMode verify_modes[] = {VerifyMode::galerkin, VerifyMode::lsq_a, VerifyMode::lsq_pa,
                                       VerifyMode::orthogonal};
constexpr ProjectionMode projection_modes[] = {ProjectionMode::galerkin, ProjectionMode::lsq_a,
                                               ProjectionMode::lsq_pa};

// Trouble modes used for the prescribed-spectrum trials.
constexpr double trial_q = 0.8;
constexpr double trial_rho = 1.5;
constexpr double trial_cond = 100.0;

std::size_t bad_modes(std::size_t n) { return std::min<std::size_t>(5, n / 2); }

std::uint64_t trial_seed(const CertifyConfig& cfg, std::size_t t) {
  return cfg.seed * 7919 + static_cast<std::uint64_t>(t) + 1;
}

Vector uniform_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

double rel_gap(std::span<const double> x, std::span<const double> y) {
  const double s = std::max(norm2(x), norm2(y));
  const double d = norm2(subtract(x, y));
  return s > 0.0 ? d / s : d;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

// span{v, M v, ..., M^(n-1) v} with M = P^-1 A, stopping once invariant.
std::vector<Vector> krylov_basis(const SparseMatrix& a, const Preconditioner& p, Vector v,
                                 std::size_t n) {
  std::vector<Vector> q;
  for (std::size_t k = 0; k < n; ++k) {
    const double orig = norm2(v);
    const Remainder rem = orthogonalize_against(q, v);
    if (orig == 0.0 || rem.norm <= 1e-13 * orig) break;
    q.push_back(scaled(1.0 / rem.norm, rem.vector));
    v = p.apply(matvec(a, q.back()));
  }
  return q;
}

struct PrescribedTrial {
  std::vector<Complex> lambdas;
  DenseMatrix a;
  std::vector<Vector> z;
};

PrescribedTrial prescribed_trial(std::size_t n, std::size_t bad, double q, double rho,
                                 std::uint64_t seed) {
  PrescribedTrial t;
  t.lambdas = trouble_spectrum(n, bad, q, rho, seed);
  t.a = gen_prescribed(n, t.lambdas, trial_cond, seed);
  t.z = dominant_invariant_subspace(t.a, bad);
  return t;
}

// {0}^m and the prescribed eigenvalues of Id - A left after the m largest.
Spectrum expected_deflated(std::span<const Complex> lambdas, std::size_t m) {
  Spectrum mu;
  for (const Complex& l : lambdas) mu.push_back(1.0 - l);
  std::stable_sort(mu.begin(), mu.end(),
                   [](Complex x, Complex y) { return std::abs(x) > std::abs(y); });
  Spectrum out(m, Complex(0.0, 0.0));
  out.insert(out.end(), mu.begin() + static_cast<std::ptrdiff_t>(m), mu.end());
  return out;
}

SparseMatrix random_sparse(std::size_t n, double density, std::uint64_t seed, double diag_shift) {
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

SolveResult run_strategy(const SparseMatrix& a, const Vector& b, const Preconditioner& p,
                         std::optional<RecruitKind> kind, ProjectionMode mode,
                         const SolverOptions& opts) {
  const Vector x0(a.rows(), 0.0);
  if (!kind) {
    const TroubleSpace none(a, p, mode);
    return dfpi_solve(a, b, x0, p, none, opts);
  }
  TroubleSpace ts(a, p, mode);
  StrategyConfig sc;
  sc.kind = *kind;
  Recruiter rec(sc);
  return dfpi_solve(a, b, x0, p, ts, rec, opts);
}

// Residual after step k, indexed by k.
std::vector<double> full_residuals(const SolverTrace& t) {
  std::vector<double> r;
  for (const auto& rec : t.full_steps()) r.push_back(rec.residual_2norm);
  return r;
}

// Residual of the projected iterate x^(k+1/2), indexed by k. Steps taken
// with an empty trouble space record no half-step; the iterate is then x^(k).
std::vector<double> projected_residuals(const SolverTrace& t) {
  std::vector<double> r;
  for (const auto& rec : t.records) {
    if (rec.iter == std::floor(rec.iter)) {
      r.push_back(rec.residual_2norm);
    } else if (!r.empty()) {
      r.back() = rec.residual_2norm;
    }
  }
  return r;
}

// Largest amount by which lo exceeds hi over the common indices.
double excess(const std::vector<double>& lo, const std::vector<double>& hi) {
  double w = 0.0;
  for (std::size_t k = 0; k < std::min(lo.size(), hi.size()); ++k) w = std::max(w, lo[k] - hi[k]);
  return w;
}

}  // namespace

CriterionResult certify_deflated_spectrum(const CertifyConfig& cfg) {
  CriterionResult out{1, "deflated spectrum", {}};
  const std::size_t bad = bad_modes(cfg.n);
  double worst = 0.0, worst_oracle = 0.0;
  std::size_t unchecked = 0;
  for (std::size_t t = 0; t < cfg.matrices; ++t) {
    const auto trial = prescribed_trial(cfg.n, bad, trial_q, trial_rho, trial_seed(cfg, t));
    const Spectrum expect = expected_deflated(trial.lambdas, trial.z.size());
    const auto p = Preconditioner::identity(cfg.n);
    for (VerifyMode mode : verify_modes) {
      const auto rep = spectrum_comparison(trial.a, p, trial.z, mode);
      if (!rep.checked) ++unchecked;
      worst = std::max(worst, rep.hausdorff);
      worst_oracle = std::max(worst_oracle, hausdorff_distance(expect, rep.spectrum_id_minus_n));
    }
  }
  const std::string trials = std::to_string(cfg.matrices) + " matrices x 4 modes";
  out.checks.push_back(make_check("uncertified invariance", static_cast<double>(unchecked), 0.0, cfg, trials));
  out.checks.push_back(make_check("hausdorff vs restriction", worst, spectrum_match_tol, cfg, trials));
  out.checks.push_back(make_check("hausdorff vs prescribed", worst_oracle, spectrum_match_tol, cfg, trials));
  return out;
}

CriterionResult certify_convergence_rate(const CertifyConfig& cfg) {
  CriterionResult out{2, "convergence rate", {}};
  const std::size_t n = cfg.n, bad = bad_modes(n);
  double worst_rate = 0.0;
  std::size_t not_converged = 0, not_diverged = 0;
  for (std::size_t t = 0; t < cfg.matrices; ++t) {
    const std::uint64_t seed = trial_seed(cfg, t);
    const auto trial = prescribed_trial(n, bad, trial_q, trial_rho, seed);
    const auto a = SparseMatrix::from_dense(trial.a);
    const auto p = Preconditioner::identity(n);
    const Vector b = uniform_vector(n, seed + 100);
    SolverOptions opts;
    opts.rel_tol = 1e-11;
    opts.max_iter = 1000;
    for (ProjectionMode m : projection_modes) {
      const auto ts = TroubleSpace::build(trial.z, m, a, p);
      const auto res = dfpi_solve(a, b, Vector(n, 0.0), p, ts, opts);
      if (res.trace.status != SolveStatus::converged) {
        ++not_converged;
        continue;
      }
      const double f = fitted_convergence_factor(res.trace);
      worst_rate = std::max(worst_rate, std::abs(f - trial_q) / trial_q);
    }
    const TroubleSpace none(a, p, ProjectionMode::galerkin);
    opts.max_iter = 200;
    const auto rich = dfpi_solve(a, b, Vector(n, 0.0), p, none, opts);
    if (rich.trace.status == SolveStatus::converged || !(rich.trace.final_residual() > norm2(b)))
      ++not_diverged;
  }
  out.checks.push_back(make_check("dfpi runs not converged", static_cast<double>(not_converged), 0.0, cfg));
  out.checks.push_back(make_check("relative rate error", worst_rate, 0.05, cfg, "q = 0.8"));
  out.checks.push_back(make_check("richardson runs not diverging", static_cast<double>(not_diverged), 0.0, cfg));
  return out;
}

CriterionResult certify_jordan_chains(const CertifyConfig& cfg) {
  CriterionResult out{3, "jordan chains", {}};
  struct Case {
    JordanSpec spec;
    std::vector<std::size_t> prefix;
    const char* name;
  };
  const std::uint64_t s = cfg.seed;
  const std::vector<Case> cases{
      {JordanSpec{{{0.5, 1}}, s + 1, false}, {0}, "1x1 block, nothing deflated"},
      {JordanSpec{{{0.9, 3}}, s + 7, false}, {1}, "3x3 block, chain start in Z"},
      {JordanSpec{{{1.2, 2}, {0.4, 2}}, s + 13, false}, {2, 0}, "deflated and untouched blocks"},
  };
  for (const auto& c : cases) {
    double worst = 0.0;
    std::size_t failed = 0;
    for (VerifyMode mode : verify_modes) {
      const auto rep = jordan_chain_check(c.spec, c.prefix, mode);
      worst = std::max(worst, rep.max_residual);
      if (!rep.pass) ++failed;
    }
    out.checks.push_back(make_check(std::string("chain residual, ") + c.name, worst, chain_tol, cfg,
                                    std::to_string(failed) + " mode(s) failing"));
  }
  return out;
}

CriterionResult certify_perturbation(const CertifyConfig& cfg) {
  CriterionResult out{4, "perturbation bound", {}};
  const std::size_t n = std::min<std::size_t>(20, cfg.n);
  const std::size_t bad = std::min<std::size_t>(3, n / 2);
  std::size_t uncertified = 0, rho_fail = 0, premised = 0, not_converged = 0;
  double drift_excess = 0.0;
  for (std::size_t t = 0; t < cfg.perturbation_trials; ++t) {
    const std::uint64_t seed = trial_seed(cfg, t);
    const auto trial = prescribed_trial(n, bad, 0.7, 1.6, seed);
    const double size = std::pow(10.0, -2.0 - static_cast<double>(t % 6));
    std::vector<Vector> deltas, perturbed;
    for (std::size_t k = 0; k < trial.z.size(); ++k) {
      deltas.push_back(scaled(size, uniform_vector(n, seed + 97 * k)));
      perturbed.push_back(add(trial.z[k], deltas.back()));
    }
    const VerifyMode mode = verify_modes[t % 4];
    const auto p = Preconditioner::identity(n);
    const auto rep = bauer_fike_check(trial.a, p, trial.z, deltas, mode);
    if (!rep.diagonalizable) {
      ++uncertified;
      continue;
    }
    drift_excess = std::max(drift_excess, rep.max_drift - rep.kappa * rep.delta_n_norm);
    if (!rep.rho_ok) ++rho_fail;
    if (!rep.premise) continue;
    ++premised;
    // The premise promises convergence; run the iteration to see it.
    bool converged = false;
    if (mode == VerifyMode::orthogonal) {
      const DenseMatrix prop =
          DenseMatrix::identity(n) - dense_iteration_matrix(trial.a, p, perturbed, mode);
      Vector e = uniform_vector(n, seed + 5);
      const double e0 = norm2(e);
      for (int k = 0; k < 5000 && !converged; ++k) {
        e = matvec(prop, e);
        converged = norm2(e) <= 1e-8 * e0;
      }
    } else {
      const auto a = SparseMatrix::from_dense(trial.a);
      const ProjectionMode pm = mode == VerifyMode::galerkin ? ProjectionMode::galerkin
                                : mode == VerifyMode::lsq_a  ? ProjectionMode::lsq_a
                                                             : ProjectionMode::lsq_pa;
      const auto ts = TroubleSpace::build(perturbed, pm, a, p);
      SolverOptions opts;
      opts.max_iter = 5000;
      const auto res = dfpi_solve(a, uniform_vector(n, seed + 5), Vector(n, 0.0), p, ts, opts);
      converged = res.trace.status == SolveStatus::converged;
    }
    if (!converged) ++not_converged;
  }
  const std::string trials = std::to_string(cfg.perturbation_trials) + " trials, " +
                             std::to_string(premised) + " with the premise";
  out.checks.push_back(make_check("uncertified eigenbases", static_cast<double>(uncertified), 0.0, cfg));
  out.checks.push_back(make_check("drift beyond kappa ||dN||", std::max(drift_excess, 0.0), 1e-9, cfg, trials));
  out.checks.push_back(make_check("rho(Id - N) above bound", static_cast<double>(rho_fail), 0.0, cfg));
  out.checks.push_back(make_check("premised runs not converging", static_cast<double>(not_converged), 0.0, cfg, trials));
  return out;
}

CriterionResult certify_richardson_krylov(const CertifyConfig& cfg) {
  CriterionResult out{5, "richardson increments span K^n", {}};
  const auto a = gen_cd1d(cfg.cd1d_n(), 50.0).a;
  const auto p = Preconditioner::jacobi(a);
  const Vector b(a.rows(), 1.0), x0(a.rows(), 0.0);
  const std::size_t steps = cfg.krylov_steps();
  const TroubleSpace none(a, p, ProjectionMode::galerkin);
  SolverOptions opts;
  opts.max_iter = steps;
  opts.rel_tol = 1e-300;
  opts.keep_history = true;
  const auto run = dfpi_solve(a, b, x0, p, none, opts);
  const Vector rt0 = p.apply(subtract(b, matvec(a, x0)));
  double worst = 0.0;
  std::vector<Vector> inc;
  for (std::size_t k = 1; k <= steps && k < run.iterates.size(); ++k) {
    inc.push_back(subtract(run.iterates[k], run.iterates[k - 1]));
    worst = std::max(worst, max_principal_angle(inc, krylov_basis(a, p, rt0, k)));
  }
  const std::string where = "cd1d(" + std::to_string(a.rows()) + ", pe=50), n = 1.." + std::to_string(steps);
  out.checks.push_back(make_check("largest principal angle", worst, 1e-8, cfg, where));
  return out;
}

CriterionResult certify_aaos_one_shot(const CertifyConfig& cfg) {
  CriterionResult out{6, "AAOS half-step = one-shot projection", {}};
  const auto a = gen_cd1d(cfg.cd1d_n(), 50.0).a;
  const auto p = Preconditioner::jacobi(a);
  const Vector b(a.rows(), 1.0), x0(a.rows(), 0.0);
  const Vector rt0 = p.apply(subtract(b, matvec(a, x0)));
  double worst_one = 0.0, worst_bc = 0.0;
  std::size_t checked = 0;
  for (ProjectionMode m : {ProjectionMode::lsq_a, ProjectionMode::lsq_pa}) {
    SolverOptions opts;
    opts.max_iter = 60;
    opts.keep_history = true;
    TroubleSpace ta(a, p, m), tb(a, p, m);
    Recruiter ra(StrategyConfig{RecruitKind::aaos}), rb(StrategyConfig{});
    const auto aa = dfpi_solve(a, b, x0, p, ta, ra, opts);
    const auto bc = dfpi_solve(a, b, x0, p, tb, rb, opts);
    for (const auto& rec : aa.trace.records) {
      if (rec.event.find("promote") == std::string::npos) continue;
      const auto k = static_cast<std::size_t>(rec.iter);
      if (k >= aa.half_iterates.size() || k >= bc.half_iterates.size()) continue;
      const auto one = TroubleSpace::build(krylov_basis(a, p, rt0, k), m, a, p);
      worst_one = std::max(worst_one, rel_gap(aa.half_iterates[k], project_iterate(one, b, x0)));
      worst_bc = std::max(worst_bc, rel_gap(aa.half_iterates[k], bc.half_iterates[k]));
      ++checked;
    }
  }
  const std::string d = std::to_string(checked) + " promotion(s) checked";
  out.checks.push_back(make_check("promotions seen", checked > 0 ? 0.0 : 1.0, 0.0, cfg));
  out.checks.push_back(make_check("vs one-shot projection", worst_one, 1e-8, cfg, d));
  out.checks.push_back(make_check("vs steadily projected", worst_bc, 1e-8, cfg, d));
  return out;
}

CriterionResult certify_krylov_equivalence(const CertifyConfig& cfg) {
  CriterionResult out{7, "krylov equivalences", {}};
  {
    const auto a = gen_cd1d(cfg.cd1d_n(), 50.0).a;
    const auto p = Preconditioner::jacobi(a);
    const Vector b(a.rows(), 1.0), x0(a.rows(), 0.0);
    KrylovOptions ko;
    ko.max_iter = 200;
    ko.keep_history = true;
    const auto g = gmres_solve(a, b, x0, p, ko);
    TroubleSpace ts(a, p, ProjectionMode::lsq_pa);
    Recruiter rec(StrategyConfig{});
    SolverOptions opts;
    opts.max_iter = 200;
    opts.keep_history = true;
    const auto d = dfpi_solve(a, b, x0, p, ts, rec, opts);
    const std::size_t upto = std::min(g.iterates.size(), d.half_iterates.size());
    double worst = upto > 1 ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < upto; ++k)
      worst = std::max(worst, rel_gap(g.iterates[k], d.half_iterates[k]));
    out.checks.push_back(make_check("gmres vs dfpi lsq-pa half-steps", worst, 1e-8, cfg,
                                    std::to_string(upto) + " iterates"));
  }
  {
    const std::size_t side = std::max<std::size_t>(3, cfg.grid_side() / 2);
    const auto a = gen_laplace2d(side, side);
    const auto p = Preconditioner::identity(a.rows());
    const Vector b = uniform_vector(a.rows(), cfg.seed + 5), x0(a.rows(), 0.0);
    const std::size_t steps = std::min<std::size_t>(10, a.rows() - 1);
    KrylovOptions ko;
    ko.max_iter = steps;
    ko.rel_tol = 1e-15;
    ko.keep_history = true;
    const auto res = cg_solve(a, b, x0, p, ko);
    const auto kb = krylov_basis(a, p, b, steps);
    double worst = res.iterates.size() > 1 ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < res.iterates.size() && k <= kb.size(); ++k) {
      const auto ts = TroubleSpace::build(std::vector<Vector>(kb.begin(), kb.begin() + static_cast<std::ptrdiff_t>(k)),
                                          ProjectionMode::galerkin, a, p);
      worst = std::max(worst, rel_gap(res.iterates[k], project_iterate(ts, b, x0)));
    }
    out.checks.push_back(make_check("cg vs galerkin projection", worst, 1e-8, cfg));
  }
  return out;
}

CriterionResult certify_variants(const CertifyConfig& cfg) {
  CriterionResult out{8, "variant equivalence", {}};
  const std::size_t n = std::max<std::size_t>(6, 4 * cfg.n / 5);
  const std::size_t nz = std::min<std::size_t>(4, n / 2);
  const std::size_t steps = 25;
  double worst = 0.0;
  for (std::size_t t = 0; t < cfg.variant_problems; ++t) {
    const std::uint64_t seed = trial_seed(cfg, t);
    const auto a = random_sparse(n, 0.15, seed, 4.0);
    const auto p = Preconditioner::ilu0(a);
    const Vector b = uniform_vector(n, seed + 1), x0 = uniform_vector(n, seed + 2);
    std::vector<Vector> z;
    for (std::size_t k = 0; k < nz; ++k) z.push_back(uniform_vector(n, seed + 10 + k));
    for (ProjectionMode m : projection_modes) {
      const auto ts = TroubleSpace::build(z, m, a, p);
      SolverOptions opts;
      opts.max_iter = steps;
      opts.rel_tol = 1e-300;
      opts.keep_history = true;
      auto run = [&](DfpiVariant v, std::span<const double> start) {
        opts.variant = v;
        return dfpi_solve(a, b, start, p, ts, opts);
      };
      const auto pre = run(DfpiVariant::pre_projection, x0);
      const auto post = run(DfpiVariant::post_projection, project_iterate(ts, b, x0));
      const auto init = run(DfpiVariant::init_projection, x0);
      const auto fin = run(DfpiVariant::final_correction, x0);
      double s = 1.0;
      for (const auto& x : pre.iterates) s = std::max(s, norm2(x));
      // Small problems can reach an exactly zero residual and stop early.
      const std::size_t count = std::min({pre.half_iterates.size(), pre.iterates.size() - 1,
                                          post.iterates.size(), post.half_iterates.size(),
                                          init.iterates.size(), fin.half_iterates.size()});
      if (count == 0) worst = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < count; ++k) {
        worst = std::max({worst, norm2(subtract(post.iterates[k], pre.half_iterates[k])) / s,
                          norm2(subtract(post.half_iterates[k], pre.iterates[k + 1])) / s,
                          norm2(subtract(init.iterates[k], pre.half_iterates[k])) / s,
                          norm2(subtract(fin.half_iterates[k], pre.half_iterates[k])) / s});
      }
    }
  }
  out.checks.push_back(make_check("largest sequence gap", worst, 1e-10, cfg,
                                  std::to_string(cfg.variant_problems) + " problems x 3 modes x 4 variants"));
  return out;
}

CriterionResult certify_strategy_comparison(const CertifyConfig& cfg) {
  CriterionResult out{9, "strategy comparison", {}};
  struct Case {
    std::string name;
    SparseMatrix a;
    PrecondKind precond;
  };
  const std::size_t side = cfg.grid_side();
  const std::string grid = std::to_string(side);
  // ILU(0) of a tridiagonal matrix is its exact LU, so the convection case
  // uses Jacobi to leave something to iterate on.
  std::vector<Case> cases;
  cases.push_back({"cd1d(" + std::to_string(cfg.cd1d_n()) + ", pe=50)/jacobi",
                   gen_cd1d(cfg.cd1d_n(), 50.0).a, PrecondKind::jacobi});
  cases.push_back({"laplace2d(" + grid + "," + grid + ")/ilu0", gen_laplace2d(side, side), PrecondKind::ilu0});
  cases.push_back({"laplace2d(" + grid + "," + grid + ")/milu", gen_laplace2d(side, side), PrecondKind::milu});

  const std::vector<RecruitKind> others{RecruitKind::bc_mw, RecruitKind::aaos, RecruitKind::tss, RecruitKind::rr};
  for (const auto& c : cases) {
    const auto p = Preconditioner::build(c.precond, c.a);
    const Vector b(c.a.rows(), 1.0);
    SolverOptions opts;
    opts.max_iter = 3000;
    opts.rel_tol = 1e-8;
    const auto rich = run_strategy(c.a, b, p, std::nullopt, ProjectionMode::lsq_a, opts);
    const auto bc = run_strategy(c.a, b, p, RecruitKind::boostconv, ProjectionMode::lsq_a, opts);
    // Gaps are measured in units of ||b|| (the initial residual), so the
    // stopping tolerance is also the resolution of the comparison.
    const double nb = norm2(b);
    double lower_full = excess(full_residuals(bc.trace), full_residuals(rich.trace)) / nb;
    double lower_half = excess(projected_residuals(bc.trace), projected_residuals(rich.trace)) / nb;
    double upper = 0.0;
    std::string lower_who = "richardson";
    for (RecruitKind k : others) {
      const auto res = run_strategy(c.a, b, p, k, ProjectionMode::lsq_a, opts);
      const double lf = excess(full_residuals(bc.trace), full_residuals(res.trace)) / nb;
      if (lf > lower_full) {
        lower_full = lf;
        lower_who = to_string(k);
      }
      lower_half = std::max(lower_half, excess(projected_residuals(bc.trace), projected_residuals(res.trace)) / nb);
      upper = std::max(upper, excess(full_residuals(res.trace), full_residuals(rich.trace)) / nb);
      if (k == RecruitKind::rr || k == RecruitKind::tss) {
        const std::string who = std::string(to_string(k)) + " on " + c.name;
        out.checks.push_back(make_check(who + " not converged",
                                        res.trace.status == SolveStatus::converged ? 0.0 : 1.0, 0.0, cfg,
                                        std::string(to_string(res.trace.status)) + " after " +
                                            std::to_string(res.trace.iterations) + " iterations"));
        out.checks.push_back(make_check(who + " peak size", static_cast<double>(res.trace.peak_trouble_size()),
                                        static_cast<double>(bc.trace.peak_trouble_size()) - 1.0, cfg,
                                        "boostconv peak " + std::to_string(bc.trace.peak_trouble_size())));
      }
    }
    out.checks.push_back(make_check("full-step residual below boostconv on " + c.name, lower_full,
                                    opts.rel_tol, cfg, "worst: " + lower_who));
    out.checks.push_back(make_check("projected residual below boostconv on " + c.name, lower_half,
                                    opts.rel_tol, cfg));
    out.checks.push_back(make_check("residual above richardson on " + c.name, upper, opts.rel_tol, cfg));

    // Nesting: increments of the first Richardson steps as Z, half of them as I.
    SolverOptions hopts;
    hopts.max_iter = 16;
    hopts.rel_tol = 1e-300;
    hopts.keep_history = true;
    const TroubleSpace none(c.a, p, ProjectionMode::lsq_a);
    const auto hist = dfpi_solve(c.a, b, Vector(c.a.rows(), 0.0), p, none, hopts);
    std::vector<Vector> zv;
    for (std::size_t k = 1; k < hist.iterates.size() && zv.size() < 8; ++k)
      zv.push_back(subtract(hist.iterates[k], hist.iterates[k - 1]));
    const std::vector<Vector> iv(zv.begin(), zv.begin() + static_cast<std::ptrdiff_t>(zv.size() / 2));
    double nest = 0.0;
    for (ProjectionMode m : {ProjectionMode::lsq_a, ProjectionMode::lsq_pa}) {
      const auto tz = TroubleSpace::build(zv, m, c.a, p);
      const auto ti = TroubleSpace::build(iv, m, c.a, p);
      const auto s_norm = [&](const Vector& x) {
        const Vector r = subtract(b, matvec(c.a, x));
        return m == ProjectionMode::lsq_a ? norm2(r) : norm2(p.apply(r));
      };
      for (const auto& x : hist.iterates) {
        const double with_z = s_norm(project_iterate(tz, b, x));
        const double with_i = s_norm(project_iterate(ti, b, x));
        nest = std::max(nest, (with_z - with_i) / std::max(1.0, with_i));
      }
    }
    out.checks.push_back(make_check("nesting on " + c.name, nest, 1e-10, cfg));
  }
  return out;
}

CriterionResult certify_kernels(const CertifyConfig& cfg) {
  CriterionResult out{10, "kernel sanity", {}};
  const std::size_t n = cfg.n;
  {
    std::vector<Vector> vs;
    for (std::size_t k = 0; k < std::max<std::size_t>(1, 2 * n / 5); ++k)
      vs.push_back(uniform_vector(n, cfg.seed + 300 + k));
    const auto q = mgs_orthonormalize(vs).basis;
    double worst = q.size() == vs.size() ? 0.0 : 1.0;
    for (std::size_t i = 0; i < q.size(); ++i)
      for (std::size_t j = 0; j < q.size(); ++j)
        worst = std::max(worst, std::abs(dot(q[i], q[j]) - (i == j ? 1.0 : 0.0)));
    out.checks.push_back(make_check("mgs orthogonality", worst, 1e-12, cfg));
  }
  {
    DenseMatrix m(n, n);
    std::mt19937_64 gen(cfg.seed + 400);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& x : m.data()) x = dist(gen);
    const auto eig = dense_eig(m, true);
    const double fro = m.frobenius_norm();
    double worst = eig.all_converged() ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < eig.values.size(); ++k) {
      const auto& v = eig.vectors[k];
      double r2 = 0.0, v2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        Complex s(0.0, 0.0);
        for (std::size_t j = 0; j < n; ++j) s += m(i, j) * v[j];
        r2 += std::norm(s - eig.values[k] * v[i]);
        v2 += std::norm(v[i]);
      }
      worst = std::max(worst, std::sqrt(r2 / v2) / fro);
    }
    out.checks.push_back(make_check("dense_eig residual", worst, eig_residual_tol, cfg));
  }
  {
    const auto a = gen_cd1d(cfg.cd1d_n(), 50.0).a;
    const auto p = Preconditioner::ilu0(a);
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
      const Vector x = uniform_vector(a.rows(), cfg.seed + 500 + s);
      const Vector ax = matvec(a, x);
      worst = std::max(worst, norm2(subtract(p.multiply(x), ax)) / norm2(ax));
      worst = std::max(worst, norm2(subtract(p.apply(ax), x)) / norm2(x));
    }
    out.checks.push_back(make_check("ilu0 exact on tridiagonal", worst, 1e-12, cfg));
  }
  {
    std::size_t mismatches = 0;
    const auto side = cfg.grid_side();
    std::vector<SparseMatrix> ms{gen_laplace2d(side, side), gen_cd1d(cfg.cd1d_n(), 50.0).a,
                                 SparseMatrix::from_dense(gen_prescribed(
                                     n, trouble_spectrum(n, bad_modes(n), 0.8, 1.5, cfg.seed), 100.0, cfg.seed))};
    for (const auto& a : ms) {
      std::stringstream ss;
      write_matrix_market(a, ss);
      if (!(read_matrix_market(ss) == a)) ++mismatches;
    }
    out.checks.push_back(make_check("matrix market round-trip mismatches", static_cast<double>(mismatches), 0.0, cfg));
  }
  return out;
}

namespace {

using CriterionFn = CriterionResult (*)(const CertifyConfig&);

// An exception inside a criterion is reported as its failure.
std::vector<CriterionResult> run_guarded(std::span<const CriterionFn> fns, const CertifyConfig& cfg) {
  std::vector<CriterionResult> out;
  for (std::size_t i = 0; i < fns.size(); ++i) {
    try {
      out.push_back(fns[i](cfg));
    } catch (const std::exception& e) {
      CriterionResult r{static_cast<int>(i + 1), "threw", {}};
      r.checks.push_back(CheckResult{"exception", 1.0, 0.0, false, e.what()});
      out.push_back(std::move(r));
    }
  }
  return out;
}

constexpr CriterionFn all_criteria[] = {
    certify_deflated_spectrum, certify_convergence_rate,   certify_jordan_chains, certify_perturbation,
    certify_richardson_krylov, certify_aaos_one_shot,      certify_krylov_equivalence,
    certify_variants,          certify_strategy_comparison, certify_kernels};

}  // namespace

std::vector<CriterionResult> certify_battery(const CertifyConfig& cfg) {
  return run_guarded(std::span<const CriterionFn>(all_criteria).first(8), cfg);
}

std::vector<CriterionResult> certify_all(const CertifyConfig& cfg) {
  return run_guarded(all_criteria, cfg);
}

std::string summary_line(const CriterionResult& c) {
  std::ostringstream os;
  os << "criterion " << c.id << " [" << c.title << "]: " << (c.pass() ? "PASS" : "FAIL");
  // Report the first failing check, or else the one closest to its limit.
  const CheckResult* shown = nullptr;
  double ratio = -1.0;
  for (const auto& k : c.checks) {
    if (!k.pass) {
      shown = &k;
      break;
    }
    const double r = k.tolerance > 0.0 ? k.measured / k.tolerance : 0.0;
    if (r > ratio) {
      ratio = r;
      shown = &k;
    }
  }
  if (shown) {
    os << " (" << shown->name << " " << fmt(shown->measured) << " <= " << fmt(shown->tolerance);
    if (!shown->detail.empty()) os << "; " << shown->detail;
    os << ")";
  }
  return os.str();
}

}  // namespace dfpi
