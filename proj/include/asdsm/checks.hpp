#pragma once

#include <cstdint>
#include <string>

#include "asdsm/mesh.hpp"
#include "asdsm/problems.hpp"
#include "asdsm/solver.hpp"

namespace asdsm::checks {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // measured quantities, for the report line
};

// Gather-after-scatter identity (exact) and injectivity for every projector
// the splitting uses on this mesh.
CheckResult projector_identities(const MeshConfig& config);

// Point classification partitions the fine mesh with the product-formula
// counts; hole blocks tile the hole set exactly.
CheckResult partition_counts(const MeshConfig& config);

// Extracted diagonal hole blocks of the fine operator equal standalone hole
// assembly entrywise.
CheckResult block_fidelity(const MeshConfig& config, const ProblemSpec& problem);

// Planting the masked oracle solution as skeleton and filling the holes
// reproduces the oracle solution.
CheckResult planted_skeleton(const MeshConfig& config, const ProblemSpec& problem, double rel_tol);

// Runs the outer iteration and asserts, at every step: residual vanishes on
// hole rows (<= 1e-10 * max(1, ||b||_inf)) and the residual 2-norm never grows
// by more than 1 + 1e-12. Optionally returns the final state.
CheckResult run_invariants(const MeshConfig& config, const ProblemSpec& problem, int iters,
                           std::uint64_t seed, IterationState* out = nullptr);

// After `iters` iterations the largest |r| entry lies within one fine step
// (per axis) of a coarse mesh point, boundary nodes included.
CheckResult residual_at_cross(const MeshConfig& config, const ProblemSpec& problem, int iters,
                              std::uint64_t seed);

// After `iters` iterations |r| is irregular across cross points: at some
// interior cross the largest face-neighbor |r| exceeds the at-cross value by
// at least `min_jump`. Neighbors below 1e-3 * ||r||_inf are ignored.
CheckResult residual_cross_jump(const MeshConfig& config, const ProblemSpec& problem, int iters,
                                double min_jump, std::uint64_t seed);

// Oracle max-error ratio between two meshes lies in [lo, hi].
CheckResult discretization_order(const ProblemSpec& problem, const MeshConfig& coarse_mesh,
                                 const MeshConfig& fine_mesh, double lo, double hi);

// Extrapolated cross values beat every input field's max error at the coarse
// points.
CheckResult richardson_improvement(const MeshConfig& config, const ProblemSpec& problem);

// Closed-form optimal scaling matches a brute-force scan over s in [0,3]
// (step 1e-3) within 1e-3 on seeded random systems.
CheckResult scaling_closed_form(int nsystems, std::uint64_t seed);

// 3D merge postconditions: holes exactly zero, every skeleton value finite,
// and each hole's face neighbors are boundary or skeleton points.
CheckResult hole_faces_complete(const MeshConfig& config, const ProblemSpec& problem,
                                std::uint64_t seed);

// Initial-guess residual of `small_problem` at least `factor` times below
// that of `large_problem` on the same mesh.
CheckResult initial_residual_gap(const MeshConfig& config, const ProblemSpec& small_problem,
                                 const ProblemSpec& large_problem, double factor,
                                 std::uint64_t seed);

}  // namespace asdsm::checks
