#include "dfpi/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dfpi {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::breakdown: return "breakdown";
  }
  return "?";
}

void SolverTrace::add(double iter, double residual, std::size_t trouble_size, std::string event) {
  if (!records.empty() && !(iter > records.back().iter))
    throw std::logic_error("solver trace: iteration index must increase");
  records.push_back({iter, residual, trouble_size, std::move(event)});
}

double SolverTrace::final_residual() const {
  return records.empty() ? std::numeric_limits<double>::quiet_NaN() : records.back().residual_2norm;
}

std::size_t SolverTrace::peak_trouble_size() const {
  std::size_t peak = 0;
  for (const auto& r : records) peak = std::max(peak, r.trouble_size);
  return peak;
}

std::vector<TraceRecord> SolverTrace::full_steps() const {
  std::vector<TraceRecord> out;
  for (const auto& r : records)
    if (r.iter == std::floor(r.iter)) out.push_back(r);
  return out;
}

std::vector<TraceRecord> SolverTrace::half_steps() const {
  std::vector<TraceRecord> out;
  for (const auto& r : records)
    if (r.iter != std::floor(r.iter)) out.push_back(r);
  return out;
}

double fitted_convergence_factor(const SolverTrace& trace, std::size_t window) {
  std::vector<TraceRecord> full = trace.full_steps();
  std::erase_if(full, [](const TraceRecord& r) { return !(r.residual_2norm > 0.0); });
  if (window < 2 || full.size() < 2)
    throw std::invalid_argument("fitted_convergence_factor: need two positive residuals");
  const std::size_t k = std::min(window, full.size());
  const auto first = full.end() - static_cast<std::ptrdiff_t>(k);
  double sx = 0.0, sy = 0.0;
  for (auto it = first; it != full.end(); ++it) {
    sx += it->iter;
    sy += std::log(it->residual_2norm);
  }
  const double mx = sx / k, my = sy / k;
  double sxy = 0.0, sxx = 0.0;
  for (auto it = first; it != full.end(); ++it) {
    sxy += (it->iter - mx) * (std::log(it->residual_2norm) - my);
    sxx += (it->iter - mx) * (it->iter - mx);
  }
  return std::exp(sxy / sxx);
}

}  // namespace dfpi
