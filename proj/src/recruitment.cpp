#include "dfpi/recruitment.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dfpi/vector_ops.hpp"

namespace dfpi {

const char* to_string(RecruitKind k) {
  switch (k) {
    case RecruitKind::boostconv: return "boostconv";
    case RecruitKind::bc_mw: return "bc-mw";
    case RecruitKind::aaos: return "aaos";
    case RecruitKind::tss: return "tss";
    case RecruitKind::rr: return "rr";
  }
  return "?";
}

RecruitKind parse_recruit_kind(const std::string& s) {
  if (s == "boostconv") return RecruitKind::boostconv;
  if (s == "bc-mw" || s == "bc_mw") return RecruitKind::bc_mw;
  if (s == "aaos") return RecruitKind::aaos;
  if (s == "tss") return RecruitKind::tss;
  if (s == "rr") return RecruitKind::rr;
  throw std::invalid_argument("unknown recruitment strategy '" + s + "'");
}

void StrategyConfig::validate() const {
  if (kind == RecruitKind::bc_mw && window < 1)
    throw std::invalid_argument("bc-mw window must be at least 1");
  if (!(stab_tol > 0.0)) throw std::invalid_argument("stab_tol must be positive");
  if (!(rr_tol > 0.0)) throw std::invalid_argument("rr_tol must be positive");
  if (temp_cap < 1) throw std::invalid_argument("temp_cap must be at least 1");
}

double TempSpace::relative_remainder(std::span<const double> v) const {
  const double vn = norm2(v);
  if (vn == 0.0) return 0.0;
  return orthogonalize_against(basis_, v).norm / vn;
}

bool TempSpace::add(std::span<const double> v) {
  const double vn = norm2(v);
  Remainder rem = orthogonalize_against(basis_, v);
  if (vn == 0.0 || rem.norm <= default_drop_tol * vn) return false;
  basis_.push_back(scaled(1.0 / rem.norm, rem.vector));
  raw_.emplace_back(v.begin(), v.end());
  return true;
}

void TempSpace::clear() {
  basis_.clear();
  raw_.clear();
}

bool stability_test(const TempSpace& temp, std::span<const double> v, double stab_tol) {
  return temp.relative_remainder(v) <= stab_tol;
}

RitzExtraction rayleigh_ritz_extract(std::span<const Vector> q, const SparseMatrix& a,
                                     const Preconditioner& p, double rr_tol) {
  RitzExtraction out;
  const std::size_t m = q.size();
  if (m == 0) return out;
  const std::size_t n = a.rows();

  std::vector<Vector> bq;  // P^-1 A q_j
  bq.reserve(m);
  for (const auto& qj : q) bq.push_back(p.apply(matvec(a, qj)));
  DenseMatrix h(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) h(i, j) = dot(q[i], bq[j]);

  const Eigendecomposition eig = dense_eig(h, true);
  for (std::size_t k = 0; k < m; ++k) {
    const Complex theta = eig.values[k];
    if (theta.imag() < 0.0) continue;  // handled with its conjugate
    const bool pair = theta.imag() > 0.0;
    // v = Q s and B v = (BQ) s, split into real and imaginary parts.
    Vector vr(n, 0.0), vi(n, 0.0), bvr(n, 0.0), bvi(n, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const Complex s = eig.vectors[k][j];
      axpy(s.real(), q[j], vr);
      axpy(s.real(), bq[j], bvr);
      if (pair) {
        axpy(s.imag(), q[j], vi);
        axpy(s.imag(), bq[j], bvi);
      }
    }
    // B v - theta v = (B vr - a vr + b vi) + i (B vi - a vi - b vr)
    const double re = theta.real(), im = theta.imag();
    double res2 = 0.0, vn2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dr = bvr[i] - re * vr[i] + im * vi[i];
      const double di = bvi[i] - re * vi[i] - im * vr[i];
      res2 += dr * dr + di * di;
      vn2 += vr[i] * vr[i] + vi[i] * vi[i];
    }
    const double vn = std::sqrt(vn2);
    const double rel = vn > 0.0 ? std::sqrt(res2) / vn : 0.0;
    const bool ok = vn > 0.0 && rel <= rr_tol * std::abs(theta);
    out.pairs.push_back({theta, rel, ok});
    if (pair) out.pairs.push_back({std::conj(theta), rel, ok});
    if (!ok) continue;
    out.approved.push_back(std::move(vr));
    if (pair) out.approved.push_back(std::move(vi));
  }
  return out;
}

Recruiter::Recruiter(StrategyConfig config) : config_(config) { config_.validate(); }

std::string Recruiter::promote(TroubleSpace& ts, const char* why) {
  std::size_t added = 0;
  for (const auto& v : temp_.basis()) {
    if (ts.capacity() && ts.size() >= *ts.capacity()) break;
    added += ts.append(v) ? 1 : 0;
  }
  const std::size_t offered = temp_.size();
  temp_.clear();
  ++promotions_;
  std::ostringstream tag;
  tag << why << ':' << added << '/' << offered;
  return tag.str();
}

std::string Recruiter::promote_ritz(TroubleSpace& ts) {
  const RitzExtraction rr =
      rayleigh_ritz_extract(temp_.basis(), ts.matrix(), ts.preconditioner(), config_.rr_tol);
  std::size_t added = 0;
  for (const auto& v : rr.approved) {
    if (ts.capacity() && ts.size() >= *ts.capacity()) break;
    added += ts.append(v) ? 1 : 0;
  }
  const std::size_t offered = temp_.size();
  temp_.clear();
  ++promotions_;
  std::ostringstream tag;
  tag << "rr:" << added << '/' << offered;
  return tag.str();
}

std::string Recruiter::record_increment(std::span<const double> dx, TroubleSpace& ts) {
  ++step_;
  std::string tag;
  switch (config_.kind) {
    case RecruitKind::boostconv:
      tag = ts.append(dx) ? "append" : "append_rejected";
      break;
    case RecruitKind::bc_mw: {
      const bool full = ts.size() >= config_.window;
      if (full) ts.drop_oldest();
      tag = std::string(full ? "drop_oldest;" : "") + (ts.append(dx) ? "append" : "append_rejected");
      break;
    }
    case RecruitKind::aaos:
    case RecruitKind::tss:
    case RecruitKind::rr: {
      const bool zero = norm2(dx) == 0.0;
      const bool stable = stability_test(temp_, dx, config_.stab_tol);
      if (!stable) {
        temp_.add(dx);
        if (temp_.size() >= config_.temp_cap) {
          tag = config_.kind == RecruitKind::rr ? "cap;" + promote_ritz(ts) : promote(ts, "cap");
          stage_ = 0;
        }
        break;
      }
      // The triggering increment belongs to the promoted space.
      temp_.add(dx);
      const std::string prefix = zero ? "zero_increment;" : "";
      if (config_.kind == RecruitKind::aaos) {
        tag = prefix + promote(ts, "promote");
      } else if (config_.kind == RecruitKind::rr) {
        tag = prefix + promote_ritz(ts);
      } else if (stage_ == 0) {
        temp_.clear();
        stage_ = 1;
        tag = prefix + "stable_discard";
      } else {
        tag = prefix + promote(ts, "promote");
        stage_ = 0;
      }
      break;
    }
  }
  if (!tag.empty()) log_.push_back({step_, tag});
  return tag;
}

}  // namespace dfpi
