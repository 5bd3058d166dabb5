#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dfpi {

/// Sizes and seeds for the certification battery. `n` is the base
/// dimension: prescribed-spectrum matrices are n x n, the convection problem
/// has 2n unknowns (at least 20) and the Laplacian grid side is 16 n / 50 (at least 3).
struct CertifyConfig {
  std::size_t n = 50;
  std::uint64_t seed = 0;
  std::size_t matrices = 20;          // theorem / rate trials
  std::size_t perturbation_trials = 100;
  std::size_t variant_problems = 10;
  /// Multiplies every tolerance. Only a test hook: values other than 1
  /// make the report meaningless.
  double tolerance_scale = 1.0;

  std::size_t cd1d_n() const { return std::max<std::size_t>(2 * n, 20); }
  std::size_t grid_side() const;
  /// Krylov dimensions examined on the convection problem (15 at full size).
  std::size_t krylov_steps() const;
};

/// One measured quantity against its threshold; pass iff measured <= tolerance.
struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<CheckResult> checks;
  bool pass() const;
};

CheckResult make_check(std::string name, double measured, double tolerance,
                       const CertifyConfig& cfg, std::string detail = {});

CriterionResult certify_deflated_spectrum(const CertifyConfig& cfg);     // 1
CriterionResult certify_convergence_rate(const CertifyConfig& cfg);      // 2
CriterionResult certify_jordan_chains(const CertifyConfig& cfg);         // 3
CriterionResult certify_perturbation(const CertifyConfig& cfg);          // 4
CriterionResult certify_richardson_krylov(const CertifyConfig& cfg);     // 5
CriterionResult certify_aaos_one_shot(const CertifyConfig& cfg);         // 6
/// The library-only part of the Krylov equivalences: GMRES against the
/// least-squares DFPI half-steps, and CG against the Galerkin projection.
CriterionResult certify_krylov_equivalence(const CertifyConfig& cfg);    // 7
CriterionResult certify_variants(const CertifyConfig& cfg);              // 8
CriterionResult certify_strategy_comparison(const CertifyConfig& cfg);   // 9
CriterionResult certify_kernels(const CertifyConfig& cfg);               // 10

/// Criteria 1-8: the theorem certifications and equivalence suites run by
/// `dfpi verify`.
std::vector<CriterionResult> certify_battery(const CertifyConfig& cfg);
/// All ten criteria.
std::vector<CriterionResult> certify_all(const CertifyConfig& cfg);

/// "PASS"/"FAIL" line with the worst check, e.g.
/// "criterion 1 [deflated spectrum]: PASS (hausdorff 3.1e-13 <= 1e-07)".
std::string summary_line(const CriterionResult& c);

}  // namespace dfpi
