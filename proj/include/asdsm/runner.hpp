#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "asdsm/problems.hpp"
#include "asdsm/solver.hpp"

namespace asdsm {

// One experiment: a benchmark problem, a mesh pair with equal per-axis
// counts, and the outer-iteration knobs.
struct RunConfig {
  int example = 1;
  int setting = 1;
  int nf = 99;            // interior fine points per axis
  int nc = 9;             // interior coarse points per axis
  double tol = 1e-12;     // relative residual tolerance
  int max_iter = 20;
  double subsample = 0.0; // skeleton-row fraction for the step length; 0 = all rows
  std::uint64_t seed = 0;
  std::string out;        // CSV path; empty keeps the history in memory only
};

struct RunResult {
  IterationState state;
  std::string csv;
};

// History serialized with the fixed header
// `k,res_l2,res_inf,err_max,err_l2,s_hat,wall_ms`, floats at 17 significant
// digits (round-trip exact).
std::string format_history_csv(const std::vector<IterationRecord>& history);

// Run the outer iteration for the configured experiment; writes the CSV to
// config.out when set.
RunResult run_experiment(const RunConfig& config);

// |r| after exactly at_iter iterations (tolerance and stagnation stopping
// disabled), reshaped to the fine grid: one CSV row per axis-1 line, axis-0
// ascending within the row. 2D meshes only.
std::string residual_snapshot(const RunConfig& config, int at_iter);

// Overwrite `path` with `content`; throws Error when the file cannot be written.
void write_text_file(const std::string& path, const std::string& content);

// Run one of the invariant suites {projectors, propositions, convergence,
// examples, all}, print a pass/fail line per check, return the failure count.
// Throws Error for an unknown suite name.
int verify_suite(const std::string& suite, std::ostream& out);

}  // namespace asdsm
