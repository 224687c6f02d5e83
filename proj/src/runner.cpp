#include "asdsm/runner.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "asdsm/checks.hpp"

namespace asdsm {

namespace {

void append_double(std::string& s, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  s += buf;
}

MeshConfig mesh_for(const RunConfig& config) {
  return example_mesh(config.example, config.setting, config.nf, config.nc);
}

IterateOptions options_for(const RunConfig& config) {
  IterateOptions opts;
  opts.tol = config.tol;
  opts.max_iter = config.max_iter;
  opts.subsample = config.subsample;
  opts.rng_seed = config.seed;
  return opts;
}

}  // namespace

std::string format_history_csv(const std::vector<IterationRecord>& history) {
  std::string csv = "k,res_l2,res_inf,err_max,err_l2,s_hat,wall_ms\n";
  for (const IterationRecord& rec : history) {
    csv += std::to_string(rec.k);
    for (const double v : {rec.res_l2, rec.res_inf, rec.err_max, rec.err_l2, rec.s_hat, rec.wall_ms}) {
      csv += ',';
      append_double(csv, v);
    }
    csv += '\n';
  }
  return csv;
}

RunResult run_experiment(const RunConfig& config) {
  const MeshConfig mesh = mesh_for(config);
  const ProblemSpec problem = make_problem(config.example, config.setting);
  RunResult result;
  result.state = asdsm_iterate(problem, mesh, options_for(config));
  result.csv = format_history_csv(result.state.history);
  if (!config.out.empty()) write_text_file(config.out, result.csv);
  return result;
}

std::string residual_snapshot(const RunConfig& config, int at_iter) {
  if (at_iter < 0 || at_iter > config.max_iter)
    throw Error("snapshot iteration " + std::to_string(at_iter) + " outside [0, max_iter]");
  const MeshConfig mesh = mesh_for(config);
  if (mesh.dim != 2) throw DimensionMismatch("residual snapshots need a 2D mesh");
  const ProblemSpec problem = make_problem(config.example, config.setting);

  IterateOptions opts = options_for(config);
  opts.max_iter = at_iter;
  opts.tol = 0.0;
  opts.stagnation_window = 0;
  const IterationState st = asdsm_iterate(problem, mesh, opts);

  const int n0 = mesh.fine_counts[0], n1 = mesh.fine_counts[1];
  std::string grid;
  for (int j = 0; j < n1; ++j) {
    for (int i = 0; i < n0; ++i) {
      if (i) grid += ',';
      const double v = st.r.values[static_cast<std::size_t>(j) * n0 + i];
      append_double(grid, v < 0 ? -v : v);
    }
    grid += '\n';
  }
  return grid;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << content;
  f.flush();
  if (!f) throw Error("cannot write " + path);
}

namespace {

using checks::CheckResult;

void run_projectors(std::vector<CheckResult>& out) {
  const std::array<std::pair<int, int>, 3> flat{{{8, 2}, {24, 4}, {99, 9}}};
  for (const auto& [nf, nc] : flat) {
    const std::array<int, 2> f{nf, nf}, c{nc, nc};
    const MeshConfig mesh = MeshConfig::create(2, f, c);
    out.push_back(checks::projector_identities(mesh));
    out.push_back(checks::partition_counts(mesh));
  }
  const std::array<int, 3> f3{24, 24, 24}, c3{4, 4, 4};
  const MeshConfig mesh3 = MeshConfig::create(3, f3, c3);
  out.push_back(checks::projector_identities(mesh3));
  out.push_back(checks::partition_counts(mesh3));
}

void run_propositions(std::vector<CheckResult>& out) {
  const MeshConfig mesh = example_mesh(1, 1, 24, 4);
  for (const int setting : {1, 2}) {
    out.push_back(checks::block_fidelity(mesh, make_problem(1, setting)));
    out.push_back(checks::planted_skeleton(mesh, make_problem(1, setting), 1e-10));
  }
  const MeshConfig tmesh = example_mesh(3, 1, 24, 4);
  out.push_back(checks::block_fidelity(tmesh, make_problem(3, 1)));
  out.push_back(checks::run_invariants(mesh, make_problem(1, 1), 10, 0));
}

void run_convergence(std::vector<CheckResult>& out) {
  const ProblemSpec p = make_problem(1, 1);
  out.push_back(checks::discretization_order(p, example_mesh(1, 1, 24, 4), example_mesh(1, 1, 49, 4),
                                             3.0, 5.0));
  out.push_back(checks::richardson_improvement(example_mesh(1, 1, 24, 4), p));
  out.push_back(checks::scaling_closed_form(10, 12345));
}

void run_examples(std::vector<CheckResult>& out) {
  for (const int example : {1, 2, 3}) {
    for (const int setting : {1, 2}) {
      out.push_back(checks::run_invariants(example_mesh(example, setting, 99, 9),
                                           make_problem(example, setting), 20, 0));
    }
  }
  out.push_back(checks::residual_cross_jump(example_mesh(2, 1, 99, 9), make_problem(2, 1), 20, 10.0, 0));
  out.push_back(checks::residual_at_cross(example_mesh(2, 2, 99, 9), make_problem(2, 2), 20, 0));
  for (const int setting : {1, 2}) {
    const MeshConfig mesh3 = example_mesh(4, setting, 24, 4);
    out.push_back(checks::run_invariants(mesh3, make_problem(4, setting), 5, 0));
    out.push_back(checks::hole_faces_complete(mesh3, make_problem(4, setting), 0));
  }
}

}  // namespace

int verify_suite(const std::string& suite, std::ostream& out) {
  std::vector<CheckResult> results;
  if (suite == "projectors" || suite == "all") run_projectors(results);
  if (suite == "propositions" || suite == "all") run_propositions(results);
  if (suite == "convergence" || suite == "all") run_convergence(results);
  if (suite == "examples" || suite == "all") run_examples(results);
  if (results.empty()) throw Error("unknown suite: " + suite);

  int failures = 0;
  for (const CheckResult& r : results) {
    out << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
    if (!r.pass) ++failures;
  }
  out << (failures ? "FAILED " + std::to_string(failures) + " of " : "passed all ")
      << results.size() << " checks\n";
  return failures;
}

}  // namespace asdsm
