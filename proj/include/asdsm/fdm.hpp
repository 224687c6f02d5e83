#pragma once

#include <functional>
#include <utility>

#include "asdsm/mesh.hpp"
#include "asdsm/sparse.hpp"

namespace asdsm {

using ScalarField = std::function<double(const Coord&)>;

// Advection-diffusion problem in non-divergence form on the unit box:
//   sum_a ( -alpha_a(x) d2u/dx_a^2 + beta_a(x) du/dx_a ) = source,  u = boundary on the edge.
// With a time axis the last coordinate is t, the time term is du/dt, and
// `boundary` doubles as initial data on the t = 0 slice.
struct ProblemSpec {
  int dim = 2;
  bool time_dependent = false;
  std::array<ScalarField, kMaxDim> alpha{};  // per spatial axis; must be positive
  std::array<ScalarField, kMaxDim> beta{};
  ScalarField source;
  ScalarField boundary;
  ScalarField exact;  // optional

  int spatial_axes() const { return time_dependent ? dim - 1 : dim; }
};

// 1D interior stencil matrices of size n: L = tridiag(-1, 2, -1) and
// D = tridiag(-1, 0, 1); scaling by steps happens during assembly.
std::pair<SparseMatrix, SparseMatrix> stencil_matrices(int n);

// Second-order centered operator on the given tensor mesh kind, Dirichlet
// rows eliminated. Coefficients are sampled at the center node of each
// stencil. Time axes use the backward two-point difference. Throws
// InvalidKind for the holes kind.
SparseMatrix assemble_operator(const MeshConfig& config, const MeshKind& kind,
                               const ProblemSpec& problem);

// Matching right-hand side: source samples plus boundary lifting from the
// eliminated Dirichlet (and initial-slice) neighbors.
GridFunction assemble_rhs(const MeshConfig& config, const MeshKind& kind, const ProblemSpec& problem);

// Operator of one hole's interior discretized standalone on the fine step,
// rows/columns in the block's own lexicographic order. Entrywise equal to
// extract_block of the fine operator on the hole's positions.
SparseMatrix assemble_hole_operator(const MeshConfig& config, const ProblemSpec& problem,
                                    const HoleBlock& block);

GridFunction residual(const SparseMatrix& A, const GridFunction& b, const GridFunction& u);

}  // namespace asdsm
