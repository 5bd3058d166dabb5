#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dfpi/dense_matrix.hpp"

namespace dfpi {

enum class SolveStatus { converged, max_iter, breakdown };

const char* to_string(SolveStatus s);

struct TraceRecord {
  double iter;  // half-steps carry a .5 index
  double residual_2norm;
  std::size_t trouble_size;
  std::string event;
};

struct SolverTrace {
  std::vector<TraceRecord> records;
  SolveStatus status = SolveStatus::max_iter;
  std::size_t iterations = 0;  // completed full steps
  std::string message;

  /// Appends a record; throws std::logic_error unless iter increases.
  void add(double iter, double residual, std::size_t trouble_size, std::string event = {});
  double final_residual() const;
  std::size_t peak_trouble_size() const;
  /// Records with an integer iteration index.
  std::vector<TraceRecord> full_steps() const;
  /// Records with a half index.
  std::vector<TraceRecord> half_steps() const;
};

/// Least-squares slope of log ||r|| against the iteration index over the
/// last `window` full steps (fewer when the trace is shorter), returned as
/// exp(slope). Needs at least two full steps with positive residuals;
/// throws std::invalid_argument otherwise.
double fitted_convergence_factor(const SolverTrace& trace, std::size_t window = 20);

struct SolveResult {
  Vector x;
  SolverTrace trace;
  /// Full iterates x^(0), x^(1), ... when history is requested.
  std::vector<Vector> iterates;
  /// Half iterates x^(1/2), x^(3/2), ... when history is requested.
  std::vector<Vector> half_iterates;
};

}  // namespace dfpi
