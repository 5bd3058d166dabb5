#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dfpi/trace.hpp"

namespace dfpi::cli {

enum ExitCode : int {
  exit_converged = 0,
  exit_config = 1,
  exit_max_iter = 2,
  exit_breakdown = 3,
  exit_verify_failed = 4,
};

/// Runs `dfpi <subcommand> ...` with argv[0] the program name. Everything the
/// command prints goes to `out` / `err`; files named by --out are written
/// directly.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// `iter,residual_2norm,trouble_size,event` followed by one line per record.
/// With `ordinal_iters` the iteration column counts records (0, 1, 2, ...)
/// instead of carrying half indices.
void write_trace_csv(const SolverTrace& trace, std::ostream& os, bool ordinal_iters = false);

}  // namespace dfpi::cli
