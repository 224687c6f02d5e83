#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "asdsm/fdm.hpp"
#include "asdsm/linsolve.hpp"
#include "asdsm/mesh.hpp"
#include "asdsm/sparse.hpp"

namespace asdsm {

// Deterministic per-iteration seed derivation (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t k);

// 2D anisotropic solutions entering skeleton construction. u_fc lives on the
// mesh dense along x / coarse along y, u_cf on the transposed one. The coarse
// solution is present exactly when the inputs are unnormalized solution
// fields; normalized error fields (unit 2-norm) come without it.
struct SkeletonInputs {
  GridFunction u_fc;
  GridFunction u_cf;
  std::optional<GridFunction> u_cc;
  bool normalized = false;
};

// Right-hand sides for the initial guess. aniso[a] belongs to the submesh
// coarse along axis a; coarse is absent in error mode.
struct RhsBundle {
  GridFunction fine;
  std::vector<GridFunction> aniso;
  std::optional<GridFunction> coarse;
};

struct IterationRecord {
  int k = 0;
  double res_l2 = 0.0;
  double res_inf = 0.0;
  double err_max = 0.0;  // nan when no exact solution is attached
  double err_l2 = 0.0;
  double s_hat = 0.0;    // nan on the k = 0 row
  double wall_ms = 0.0;
};

struct IterationState {
  GridFunction u;
  GridFunction r;
  std::vector<IterationRecord> history;
  std::string stop_reason;  // "tol" | "max_iter" | "stagnation"
};

struct IterateOptions {
  double tol = 1e-12;           // relative to ||b||_2 (absolute when b == 0)
  int max_iter = 20;
  int stagnation_window = 3;    // 0 disables stagnation detection
  double stagnation_ratio = 0.99;
  double subsample = 0.0;       // fraction of skeleton rows for s_hat; 0 = all rows
  std::uint64_t rng_seed = 0;
  int workers = -1;             // see resolve_workers
  bool sparse_residual = false; // evaluate residual updates on skeleton rows only
  // Called after each recorded iteration (including k = 0).
  std::function<void(const IterationState&)> observer;
};

// Pointwise u1 + u2 - u_cc on the coarse mesh; cancels the leading
// one-directional coarse-step error terms of the two restrictions.
GridFunction richardson_extrapolate(const GridFunction& u1_cc, const GridFunction& u2_cc,
                                    const GridFunction& u_cc);

// Cross-point values for normalized (error-mode) inputs: the coarse
// restriction of one anisotropic solution, picked by the seeded draw.
// Candidates are ordered by their coarse axis.
GridFunction choose_cross_points(const SkeletonInputs& inputs, const MeshConfig& config,
                                 std::uint64_t rng_seed);

// Add to a 2D anisotropic solution the spline interpolant (natural cubic,
// clamped to zero at the domain ends) of a coarse-mesh correction, line by
// line along dense_axis. Exact at the coarse knots.
GridFunction spline_correct(const GridFunction& u_aniso, const GridFunction& e_cc, int dense_axis,
                            const MeshConfig& config);

// 2D skeleton: extrapolated (or randomly chosen) cross values, spline-corrected
// anisotropic solutions, merged onto the fine mesh with the double-counted
// coarse restriction subtracted. Holes stay exactly zero.
GridFunction build_skeleton(const SkeletonInputs& inputs, const MeshConfig& config,
                            std::uint64_t rng_seed);

// 3D skeleton from the three slab solutions (u_x is coarse along x, etc.).
// Cross values on the triple-coarse mesh come from the derived extrapolation
// (s_x + s_y + s_z - u_ccc)/2, pairwise-mesh values from spline-lifted
// corrections, slabs from per-plane Boolean-sum corrections; the merge is by
// inclusion-exclusion. Without u_ccc (error mode) the targets are seeded
// random slab choices, as in 2D.
GridFunction merge_3d(const GridFunction& u_x, const GridFunction& u_y, const GridFunction& u_z,
                      const std::optional<GridFunction>& u_ccc, const MeshConfig& config,
                      std::uint64_t rng_seed);

// Complete a hollow skeleton by solving the independent hole systems with the
// skeleton's coupling moved to the right-hand side. The result satisfies the
// fine equations exactly on every hole row.
GridFunction fill_holes(const GridFunction& skeleton, const SparseMatrix& A_ff,
                        const GridFunction& b_ff, const MeshConfig& config, int workers = -1);

// One-shot initial guess from a right-hand-side bundle (smooth mode with
// bundle.coarse, error mode without). Assembles its own operators; the
// iteration uses SolverContext instead.
GridFunction initial_guess(const ProblemSpec& problem, const MeshConfig& config,
                           const RhsBundle& bundle, std::uint64_t rng_seed, int workers = -1);

// Closed-form step length argmin_s ||r - s A e||_2 clamped at zero. subsample
// in (0,1] estimates it from a seeded draw of skeleton rows.
double optimal_scaling(const MeshConfig& config, const GridFunction& r, const SparseMatrix& A_ff,
                       const GridFunction& e_tilde, double subsample, std::uint64_t rng_seed);

// Everything the outer iteration reuses across steps: operators, right-hand
// sides, factorizations, projectors, the hole plan, skeleton row indices.
class SolverContext {
 public:
  SolverContext(const MeshConfig& config, const ProblemSpec& problem);

  const MeshConfig& config() const { return config_; }
  const ProblemSpec& problem() const { return problem_; }
  const SparseMatrix& fine_operator() const { return A_fine_; }
  const GridFunction& fine_rhs() const { return b_fine_; }
  const HoleSolvePlan& hole_plan() const { return holes_; }
  std::span<const std::int64_t> skeleton_rows() const { return skeleton_rows_; }

  RhsBundle assembled_bundle() const;

  // Smooth or error mode depending on bundle.coarse; throws ZeroNormSolution
  // when an error-mode anisotropic solve returns zero.
  GridFunction initial_guess(const RhsBundle& bundle, std::uint64_t rng_seed, int workers = -1) const;
  // Error-mode guess for a residual: projects r onto the anisotropic meshes,
  // solves, normalizes, merges, fills holes against a zero right-hand side.
  GridFunction error_guess(const GridFunction& r_fine, std::uint64_t rng_seed, int workers = -1) const;

  GridFunction fill(const GridFunction& skeleton, std::span<const double> b, int workers) const;

 private:
  MeshConfig config_;
  ProblemSpec problem_;
  MeshKind fine_kind_;
  SparseMatrix A_fine_;
  GridFunction b_fine_;
  std::vector<MeshKind> slab_kinds_;
  std::vector<SparseMatrix> slab_ops_;
  std::vector<Factorization> slab_factors_;
  std::vector<Projector> fine_to_slab_;
  SparseMatrix coarse_op_;
  std::optional<Factorization> coarse_factor_;
  HoleSolvePlan holes_;
  std::vector<std::int64_t> skeleton_rows_;
};

// The outer iteration: smooth initial guess, then repeated error-mode guesses
// from the current residual, each applied with the optimal scaling.
IterationState asdsm_iterate(const ProblemSpec& problem, const MeshConfig& config,
                             const IterateOptions& options = {});

}  // namespace asdsm
