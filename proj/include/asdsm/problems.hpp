#pragma once

#include <utility>

#include "asdsm/fdm.hpp"
#include "asdsm/mesh.hpp"

namespace asdsm {

// Manufactured benchmark problems, each with an attached exact solution:
//   1: 2D steady advection-diffusion; setting 1 has unit coefficients and a
//      low-frequency solution, setting 2 variable coefficients and a
//      high-frequency one.
//   2: small toy variants used for residual snapshots; setting 1 is the
//      steady toy (same fields as 1/1), setting 2 the space-time toy (3/1).
//   3: 1D space + time, discretized as a 2D mesh with the last axis marked
//      as time; settings mirror example 1.
//   4: 3D steady; settings mirror example 1.
ProblemSpec make_problem(int example, int setting);  // throws UnknownExample

// Mesh for a given example with equal per-axis interior counts.
MeshConfig example_mesh(int example, int setting, int nf, int nc);

// {max error, discrete L2 error} of u against the problem's exact solution on
// u's mesh. Throws NoExactSolution when no exact solution is attached and
// InvalidKind for the holes layout.
std::pair<double, double> error_norms(const MeshConfig& config, const ProblemSpec& problem,
                                      const GridFunction& u);

}  // namespace asdsm
