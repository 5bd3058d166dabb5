#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dfpi/eigen.hpp"
#include "dfpi/trouble_space.hpp"

namespace dfpi {

enum class RecruitKind { boostconv, bc_mw, aaos, tss, rr };

const char* to_string(RecruitKind k);
/// Accepts "boostconv", "bc-mw"/"bc_mw", "aaos", "tss", "rr".
RecruitKind parse_recruit_kind(const std::string& s);

inline constexpr double default_stab_tol = 5e-2;
inline constexpr double default_rr_tol = 1e-2;
inline constexpr std::size_t default_temp_cap = 30;

struct StrategyConfig {
  RecruitKind kind = RecruitKind::boostconv;
  std::size_t window = 10;  // bc_mw only
  double stab_tol = default_stab_tol;
  double rr_tol = default_rr_tol;
  std::size_t temp_cap = default_temp_cap;

  /// Throws std::invalid_argument on a bad combination.
  void validate() const;
};

/// Temporary subspace of recent increments, kept orthonormal.
class TempSpace {
 public:
  std::size_t size() const noexcept { return basis_.size(); }
  bool empty() const noexcept { return basis_.empty(); }
  std::span<const Vector> basis() const noexcept { return basis_; }
  std::span<const Vector> raw() const noexcept { return raw_; }

  /// ||(Id - Pi) v|| / ||v|| with Pi the orthogonal projector on the span.
  double relative_remainder(std::span<const double> v) const;
  /// Returns false (and keeps nothing) when v is dependent on the basis.
  bool add(std::span<const double> v);
  void clear();

 private:
  std::vector<Vector> basis_;
  std::vector<Vector> raw_;
};

/// True iff ||(Id - Pi_temp) v|| <= stab_tol ||v||; a zero v counts as stable.
bool stability_test(const TempSpace& temp, std::span<const double> v, double stab_tol);

struct RitzPair {
  Complex theta;       // eigenvalue estimate of P^-1 A
  double residual;     // ||P^-1 A v - theta v|| / ||v||
  bool approved;
};

struct RitzExtraction {
  std::vector<Vector> approved;  // real vectors; a complex pair gives two
  std::vector<RitzPair> pairs;   // one entry per Ritz value
};

/// Rayleigh-Ritz on span(q) (orthonormal) for the operator P^-1 A. A Ritz
/// vector is approved iff its residual is at most rr_tol |theta| ||v||;
/// conjugate pairs are approved or rejected together and returned as the
/// real and imaginary parts.
RitzExtraction rayleigh_ritz_extract(std::span<const Vector> q, const SparseMatrix& a,
                                     const Preconditioner& p, double rr_tol);

/// Drives trouble-space growth from the increments of a running solve.
///
///   boostconv  append every increment
///   bc_mw      append, dropping the oldest direction beyond `window`
///   aaos       collect increments in a temporary space; once an increment
///              is stable against it, promote the space and the increment
///   tss        the first stability event discards the temporary space, the
///              second one promotes it
///   rr         on stability, promote only the approved Ritz vectors
///
/// A temporary space reaching temp_cap is promoted unconditionally.
class Recruiter {
 public:
  explicit Recruiter(StrategyConfig config);

  const StrategyConfig& config() const noexcept { return config_; }
  const TempSpace& temp() const noexcept { return temp_; }
  int stage() const noexcept { return stage_; }

  /// Feeds x^(k) - x^(k-1) and applies the resulting basis actions to ts.
  /// Returns the event tag for the step (empty when nothing happened).
  std::string record_increment(std::span<const double> dx, TroubleSpace& ts);

  struct LogEntry {
    std::size_t step;
    std::string tag;
  };
  std::span<const LogEntry> log() const noexcept { return log_; }
  std::size_t promotions() const noexcept { return promotions_; }

 private:
  std::string promote(TroubleSpace& ts, const char* why);
  std::string promote_ritz(TroubleSpace& ts);

  StrategyConfig config_;
  TempSpace temp_;
  int stage_ = 0;
  std::size_t step_ = 0;
  std::size_t promotions_ = 0;
  std::vector<LogEntry> log_;
};

}  // namespace dfpi
