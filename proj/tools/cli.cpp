#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "dfpi/certify.hpp"
#include "dfpi/dfpi.hpp"
#include "dfpi/krylov.hpp"
#include "dfpi/preconditioner.hpp"
#include "dfpi/problems.hpp"
#include "dfpi/recruitment.hpp"
#include "dfpi/spectral.hpp"
#include "dfpi/vector_ops.hpp"

namespace dfpi::cli {
namespace {

const std::vector<std::string> solver_names{"richardson", "dfpi", "gmres", "gmresn", "cg", "bicg", "bicgstab"};
const std::vector<std::string> recruit_names{"boostconv", "bc-mw", "aaos", "tss", "rr"};

struct RunConfig {
  std::string problem;
  std::string matrix;
  std::string rhs;
  std::string precond = "jacobi";
  std::string solver = "dfpi";
  std::string project = "lsq-a";
  std::string recruit;
  std::size_t deflate = 0;
  std::size_t window = 10;
  double stab_tol = default_stab_tol;
  double rr_tol = default_rr_tol;
  std::size_t temp_cap = default_temp_cap;
  double tol = 1e-8;
  std::size_t max_iter = 1000;
  std::size_t restart = 20;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string count = "total";
  bool no_halves = false;
};

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_iter(double iter) {
  char buf[40];
  if (iter == std::floor(iter))
    std::snprintf(buf, sizeof buf, "%.0f", iter);
  else
    std::snprintf(buf, sizeof buf, "%.1f", iter);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

void add_problem_options(CLI::App* app, RunConfig& c) {
  app->add_option("--problem", c.problem,
                  "Built-in problem, e.g. cd1d:n=100,pe=50, laplace2d:nx=16,ny=16, "
                  "prescribed:n=50,bad=5,q=0.8,rho=1.5, jordan:blocks=0.9x3 (default cd1d:n=100,pe=50)");
  app->add_option("--matrix", c.matrix, "Matrix Market file with A")->excludes("--problem");
  app->add_option("--rhs", c.rhs, "Matrix Market array file with b (default: ones)");
  app->add_option("--precond", c.precond, "Preconditioner")
      ->check(CLI::IsMember({"identity", "jacobi", "ilu0", "milu"}));
  app->add_option("--seed", c.seed, "Seed for generated problems and random right-hand sides");
}

void add_solver_options(CLI::App* app, RunConfig& c) {
  app->add_option("--project", c.project, "Projection of the trouble space")
      ->check(CLI::IsMember({"galerkin", "lsq-a", "lsq-pa"}));
  app->add_option("--window", c.window, "Window of bc-mw");
  app->add_option("--stab-tol", c.stab_tol, "Stability threshold of aaos, tss and rr");
  app->add_option("--rr-tol", c.rr_tol, "Ritz residual threshold of rr");
  app->add_option("--temp-cap", c.temp_cap, "Temporary space size forcing a promotion");
  app->add_option("--tol", c.tol, "Relative residual tolerance");
  app->add_option("--max-iter", c.max_iter, "Iteration limit");
  app->add_option("--restart", c.restart, "Restart length of gmresn");
  app->add_option("--count", c.count, "BiCGStab iteration count: total half-steps or reported steps")
      ->check(CLI::IsMember({"total", "reported"}));
}

Problem load_problem(const RunConfig& c) {
  Problem p;
  if (!c.matrix.empty()) {
    p.a = read_matrix_market(c.matrix);
    if (p.a.rows() != p.a.cols()) throw std::invalid_argument("--matrix must be square");
    p.name = c.matrix;
    p.b = Vector(p.a.rows(), 1.0);
  } else {
    std::string text = c.problem.empty() ? "cd1d:n=100,pe=50" : c.problem;
    if (c.seed && text.find("seed=") == std::string::npos)
      text += (text.find(':') == std::string::npos ? ":" : ",") + std::string("seed=") + std::to_string(*c.seed);
    p = build_problem(parse_problem_spec(text));
  }
  if (!c.rhs.empty()) {
    p.b = read_vector_market(c.rhs);
    if (p.b.size() != p.a.rows())
      throw std::invalid_argument("--rhs has " + std::to_string(p.b.size()) + " entries, A has " +
                                  std::to_string(p.a.rows()) + " rows");
  }
  return p;
}

StrategyConfig strategy_config(const RunConfig& c, const std::string& name) {
  StrategyConfig s;
  s.kind = parse_recruit_kind(name);
  s.window = c.window;
  s.stab_tol = c.stab_tol;
  s.rr_tol = c.rr_tol;
  s.temp_cap = c.temp_cap;
  s.validate();
  return s;
}

void validate(const RunConfig& c) {
  if (!(c.tol > 0.0)) throw std::invalid_argument("--tol must be positive");
  if (c.max_iter == 0) throw std::invalid_argument("--max-iter must be positive");
  if (c.solver != "dfpi" && !c.recruit.empty())
    throw std::invalid_argument("--recruit needs --solver dfpi");
  if (c.solver != "dfpi" && c.deflate > 0) throw std::invalid_argument("--deflate needs --solver dfpi");
  if (!c.recruit.empty() && c.deflate > 0)
    throw std::invalid_argument("--recruit and --deflate are exclusive");
  if (c.solver == "gmresn" && c.restart == 0) throw std::invalid_argument("--restart must be positive");
  if (!c.recruit.empty()) strategy_config(c, c.recruit);
}

// Runs one method; `recruit` non-empty selects dynamic DFPI.
SolveResult run_method(const RunConfig& c, const std::string& solver, const std::string& recruit,
                       const Problem& prob, const Preconditioner& p) {
  const Vector x0(prob.a.rows(), 0.0);
  if (solver == "dfpi") {
    SolverOptions opts;
    opts.max_iter = c.max_iter;
    opts.rel_tol = c.tol;
    opts.record_halves = !c.no_halves;
    const ProjectionMode mode = parse_projection_mode(c.project);
    if (!recruit.empty()) {
      TroubleSpace ts(prob.a, p, mode);
      Recruiter rec(strategy_config(c, recruit));
      return dfpi_solve(prob.a, prob.b, x0, p, ts, rec, opts);
    }
    std::vector<Vector> z;
    if (c.deflate > 0)
      z = dominant_invariant_subspace(preconditioned_operator(p, prob.a.to_dense()), c.deflate);
    const auto ts = TroubleSpace::build(z, mode, prob.a, p);
    return dfpi_solve(prob.a, prob.b, x0, p, ts, opts);
  }
  KrylovOptions ko;
  ko.max_iter = c.max_iter;
  ko.rel_tol = c.tol;
  if (solver == "richardson") return richardson_solve(prob.a, prob.b, x0, p, ko);
  if (solver == "gmres") return gmres_solve(prob.a, prob.b, x0, p, ko);
  if (solver == "gmresn") {
    ko.restart = c.restart;
    return gmres_solve(prob.a, prob.b, x0, p, ko);
  }
  if (solver == "cg") return cg_solve(prob.a, prob.b, x0, p, ko);
  if (solver == "bicg") return bicg_solve(prob.a, prob.b, x0, p, ko);
  if (solver == "bicgstab") return bicgstab_solve(prob.a, prob.b, x0, p, ko);
  throw std::invalid_argument("unknown solver '" + solver + "'");
}

bool ordinal_count(const RunConfig& c, const std::string& solver) {
  return solver == "bicgstab" && c.count == "total";
}

std::size_t counted_iterations(const SolverTrace& t, bool ordinal) {
  if (!ordinal || t.records.empty()) return t.iterations;
  return static_cast<std::size_t>(std::lround(2.0 * t.records.back().iter));
}

int exit_for(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return exit_converged;
    case SolveStatus::max_iter: return exit_max_iter;
    case SolveStatus::breakdown: return exit_breakdown;
  }
  return exit_breakdown;
}

int cmd_solve(const RunConfig& c, std::ostream& out, std::ostream& err) {
  SolveResult res;
  try {
    validate(c);
    const Problem prob = load_problem(c);
    const auto p = Preconditioner::build(parse_precond_kind(c.precond), prob.a);
    res = run_method(c, c.solver, c.recruit, prob, p);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  }
  const bool ordinal = ordinal_count(c, c.solver);
  if (c.out.empty()) {
    write_trace_csv(res.trace, out, ordinal);
  } else {
    std::ofstream f(c.out);
    if (!f) {
      err << "error: cannot write " << c.out << '\n';
      return exit_config;
    }
    write_trace_csv(res.trace, f, ordinal);
  }
  err << c.solver << (c.recruit.empty() ? "" : "+" + c.recruit) << ": " << to_string(res.trace.status)
      << " after " << counted_iterations(res.trace, ordinal) << " iterations, residual "
      << format_number(res.trace.final_residual());
  if (!res.trace.message.empty()) err << " (" << res.trace.message << ")";
  err << '\n';
  return exit_for(res.trace.status);
}

struct CompareRow {
  std::string method;
  std::string status;
  std::size_t iterations = 0;
  double final_residual = 0.0;
  std::size_t peak = 0;
  std::string message;
  bool ran = false;
};

std::vector<std::string> split_methods(const std::string& list) {
  std::vector<std::string> names;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    names.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
  }
  return names;
}

bool is_member(const std::vector<std::string>& set, const std::string& s) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

int cmd_compare(const RunConfig& c, const std::string& methods, const std::string& trace_dir,
                std::ostream& out, std::ostream& err) {
  const auto names = split_methods(methods);
  if (names.empty()) {
    err << "error: empty method suite\n";
    return exit_config;
  }
  for (const auto& n : names) {
    if (n == "dfpi" || (!is_member(solver_names, n) && !is_member(recruit_names, n))) {
      err << "error: unknown method '" << n << "' (solvers: richardson, gmres, gmresn, cg, bicg, "
          << "bicgstab; strategies: boostconv, bc-mw, aaos, tss, rr)\n";
      return exit_config;
    }
  }
  Problem prob;
  Preconditioner p;
  try {
    validate(c);
    prob = load_problem(c);
    p = Preconditioner::build(parse_precond_kind(c.precond), prob.a);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  }
  if (!trace_dir.empty()) std::filesystem::create_directories(trace_dir);

  std::vector<CompareRow> rows;
  for (const auto& n : names) {
    CompareRow row;
    row.method = n;
    const bool strategy = is_member(recruit_names, n);
    const std::string solver = strategy ? "dfpi" : n;
    try {
      const auto res = run_method(c, solver, strategy ? n : "", prob, p);
      const bool ordinal = ordinal_count(c, solver);
      row.ran = true;
      row.status = to_string(res.trace.status);
      row.iterations = counted_iterations(res.trace, ordinal);
      row.final_residual = res.trace.final_residual();
      row.peak = res.trace.peak_trouble_size();
      row.message = res.trace.message;
      if (!trace_dir.empty()) {
        std::ofstream f(std::filesystem::path(trace_dir) / (n + ".csv"));
        write_trace_csv(res.trace, f, ordinal);
      }
    } catch (const std::exception& e) {
      row.status = "error";
      row.message = e.what();
    }
    rows.push_back(row);
  }

  out << "problem " << prob.name << ", preconditioner " << c.precond << ", projection " << c.project << '\n';
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-10s %10s %15s %12s\n", "method", "status", "iterations",
                "final_residual", "peak_trouble");
  out << line;
  for (const auto& r : rows) {
    if (r.ran)
      std::snprintf(line, sizeof line, "%-12s %-10s %10zu %15.6e %12zu", r.method.c_str(), r.status.c_str(),
                    r.iterations, r.final_residual, r.peak);
    else
      std::snprintf(line, sizeof line, "%-12s %-10s %10s %15s %12s", r.method.c_str(), r.status.c_str(), "-",
                    "-", "-");
    out << line;
    if (!r.message.empty()) out << "  " << r.message;
    out << '\n';
  }
  if (!c.out.empty()) {
    std::ofstream f(c.out);
    if (!f) {
      err << "error: cannot write " << c.out << '\n';
      return exit_config;
    }
    f << "method,status,iterations,final_residual,peak_trouble_size,message\n";
    for (const auto& r : rows) {
      f << r.method << ',' << r.status << ',';
      if (r.ran) f << r.iterations << ',' << format_number(r.final_residual) << ',' << r.peak;
      else f << ",,";
      f << ',' << csv_field(r.message) << '\n';
    }
  }
  return exit_converged;
}

int cmd_verify(const CertifyConfig& cfg, std::ostream& out, std::ostream& err) {
  out << "certification battery, n = " << cfg.n << ", seed = " << cfg.seed << '\n';
  const auto results = certify_battery(cfg);
  std::vector<std::string> failing;
  for (const auto& c : results) {
    out << summary_line(c) << '\n';
    for (const auto& k : c.checks) {
      out << "    " << (k.pass ? "ok   " : "FAIL ") << k.name << ": " << format_number(k.measured)
          << " <= " << format_number(k.tolerance);
      if (!k.detail.empty()) out << "  (" << k.detail << ")";
      out << '\n';
      if (!k.pass) failing.push_back("criterion " + std::to_string(c.id) + " [" + c.title + "]: " + k.name);
    }
  }
  if (failing.empty()) return exit_converged;
  for (const auto& f : failing) err << "failed check: " << f << '\n';
  return exit_verify_failed;
}

}  // namespace

void write_trace_csv(const SolverTrace& trace, std::ostream& os, bool ordinal_iters) {
  os << "iter,residual_2norm,trouble_size,event\n";
  std::size_t k = 0;
  for (const auto& r : trace.records) {
    os << (ordinal_iters ? std::to_string(k++) : format_iter(r.iter)) << ',' << format_number(r.residual_2norm)
       << ',' << r.trouble_size << ',' << csv_field(r.event) << '\n';
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deflated fixed-point iterations: solve, compare strategies, verify"};
  app.require_subcommand(1);

  RunConfig solve_cfg;
  auto* solve = app.add_subcommand("solve", "Solve one system and write the residual trace as CSV");
  add_problem_options(solve, solve_cfg);
  add_solver_options(solve, solve_cfg);
  solve->add_option("--solver", solve_cfg.solver, "Iteration")->check(CLI::IsMember(solver_names));
  solve->add_option("--recruit", solve_cfg.recruit, "Trouble-space recruitment for dfpi")
      ->check(CLI::IsMember(recruit_names));
  solve->add_option("--deflate", solve_cfg.deflate,
                    "Deflate the k dominant eigenvectors of P^-1 A (dense; up to 300 unknowns)");
  solve->add_flag("--no-halves", solve_cfg.no_halves, "Leave projected half-steps out of the trace");
  solve->add_option("--out", solve_cfg.out, "CSV trace file (default: standard output)");

  RunConfig cmp_cfg;
  std::string methods = "richardson,boostconv,bc-mw,aaos,tss,rr";
  std::string trace_dir;
  auto* compare = app.add_subcommand("compare", "Run several methods on one problem and tabulate them");
  add_problem_options(compare, cmp_cfg);
  add_solver_options(compare, cmp_cfg);
  compare->add_option("--methods", methods,
                      "Comma-separated solvers and dfpi strategies (default: " + methods + ")");
  compare->add_option("--out", cmp_cfg.out, "CSV copy of the table");
  compare->add_option("--trace-dir", trace_dir, "Directory receiving one trace CSV per method");

  CertifyConfig vcfg;
  std::optional<std::size_t> scale;
  auto* verify = app.add_subcommand("verify", "Run the certification battery");
  verify->add_option("--seed", vcfg.seed, "Battery seed");
  auto* n_opt = verify->add_option("--n", vcfg.n, "Base dimension (default 50)")->check(CLI::Range(2, 300));
  verify->add_option("--scale", scale, "Base dimension 2*scale (scale 2 is a quick smoke run)")
      ->excludes(n_opt)
      ->check(CLI::Range(1, 150));
  // Test hook: multiplies every tolerance so the failure path can be exercised.
  verify->add_option("--tolerance-scale", vcfg.tolerance_scale)->group("");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_converged : exit_config;
  }

  if (*solve) return cmd_solve(solve_cfg, out, err);
  if (*compare) return cmd_compare(cmp_cfg, methods, trace_dir, out, err);
  if (scale) vcfg.n = 2 * *scale;
  return cmd_verify(vcfg, out, err);
}

}  // namespace dfpi::cli
