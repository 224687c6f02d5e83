#include "asdsm/fdm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace asdsm {

namespace {

struct AxisSpec {
  int count = 0;       // interior points
  double step = 0.0;   // stencil step
  int stride = 1;      // fine-index units per interior index
  int origin = 0;      // fine-index offset of the local index 0 (a boundary/face plane)
  bool time = false;
};

std::array<AxisSpec, kMaxDim> axes_for_kind(const MeshConfig& config, const MeshKind& kind) {
  std::array<AxisSpec, kMaxDim> ax{};
  for (int a = 0; a < config.dim; ++a) {
    auto& s = ax[static_cast<std::size_t>(a)];
    s.count = config.axis_points(kind, a);
    s.step = kind.coarse_on(a) ? config.coarse_steps[static_cast<std::size_t>(a)]
                               : config.fine_steps[static_cast<std::size_t>(a)];
    s.stride = kind.coarse_on(a) ? config.factors[static_cast<std::size_t>(a)] : 1;
    s.origin = 0;
    s.time = (a == config.time_axis);
  }
  return ax;
}

std::array<AxisSpec, kMaxDim> axes_for_hole(const MeshConfig& config, const HoleBlock& block) {
  std::array<AxisSpec, kMaxDim> ax{};
  for (int a = 0; a < config.dim; ++a) {
    auto& s = ax[static_cast<std::size_t>(a)];
    s.count = config.factors[static_cast<std::size_t>(a)] - 1;
    s.step = config.fine_steps[static_cast<std::size_t>(a)];
    s.stride = 1;
    s.origin = block.hole[static_cast<std::size_t>(a)] * config.factors[static_cast<std::size_t>(a)];
    s.time = (a == config.time_axis);
  }
  return ax;
}

void check_problem(const MeshConfig& config, const ProblemSpec& problem) {
  if (problem.dim != config.dim) throw DimensionMismatch("problem/mesh dimension mismatch");
  if (problem.time_dependent != (config.time_axis >= 0))
    throw DimensionMismatch("problem and mesh disagree about a time axis");
  for (int a = 0; a < problem.spatial_axes(); ++a)
    if (!problem.alpha[static_cast<std::size_t>(a)] || !problem.beta[static_cast<std::size_t>(a)])
      throw std::invalid_argument("missing coefficient function on axis " + std::to_string(a));
}

// Off-diagonal coefficients of one row along one axis; the diagonal
// contribution is returned through `diag`.
struct RowCoeffs {
  double left = 0.0;
  double right = 0.0;
  bool has_right = true;
};

RowCoeffs axis_coeffs(const AxisSpec& ax, int axis, const ProblemSpec& problem, const Coord& x,
                      double& diag) {
  RowCoeffs rc;
  if (ax.time) {
    const double tc = 1.0 / ax.step;
    diag += tc;
    rc.left = -tc;
    rc.has_right = false;
    return rc;
  }
  const double a = problem.alpha[static_cast<std::size_t>(axis)](x);
  if (!(a > 0.0))
    throw std::domain_error("diffusion coefficient not positive on axis " + std::to_string(axis));
  const double c = a / (ax.step * ax.step);
  const double d = problem.beta[static_cast<std::size_t>(axis)](x) / (2.0 * ax.step);
  diag += 2.0 * c;
  rc.left = -c - d;
  rc.right = -c + d;
  return rc;
}

SparseMatrix assemble_core(const MeshConfig& config, std::span<const AxisSpec> ax,
                           const ProblemSpec& problem) {
  const int dim = config.dim;
  std::array<std::int64_t, kMaxDim> lin_stride{};
  std::int64_t total = 1;
  for (int a = 0; a < dim; ++a) {
    lin_stride[static_cast<std::size_t>(a)] = total;
    total *= ax[static_cast<std::size_t>(a)].count;
  }

  SparseBuilder builder(total, total);
  std::array<int, kMaxDim> idx{};
  for (int a = 0; a < dim; ++a) idx[static_cast<std::size_t>(a)] = 1;

  for (std::int64_t lin = 0; lin < total; ++lin) {
    Coord x{};
    for (int a = 0; a < dim; ++a)
      x[static_cast<std::size_t>(a)] = config.axis_coordinate(
          a, ax[static_cast<std::size_t>(a)].origin +
                 static_cast<std::int64_t>(idx[static_cast<std::size_t>(a)]) * ax[static_cast<std::size_t>(a)].stride);

    double diag = 0.0;
    std::array<RowCoeffs, kMaxDim> rc{};
    for (int a = 0; a < dim; ++a)
      rc[static_cast<std::size_t>(a)] = axis_coeffs(ax[static_cast<std::size_t>(a)], a, problem, x, diag);

    for (int a = dim - 1; a >= 0; --a)
      if (idx[static_cast<std::size_t>(a)] > 1)
        builder.add(lin - lin_stride[static_cast<std::size_t>(a)], rc[static_cast<std::size_t>(a)].left);
    builder.add(lin, diag);
    for (int a = 0; a < dim; ++a)
      if (idx[static_cast<std::size_t>(a)] < ax[static_cast<std::size_t>(a)].count &&
          rc[static_cast<std::size_t>(a)].has_right)
        builder.add(lin + lin_stride[static_cast<std::size_t>(a)], rc[static_cast<std::size_t>(a)].right);
    builder.next_row();

    for (int a = 0; a < dim; ++a) {
      if (++idx[static_cast<std::size_t>(a)] <= ax[static_cast<std::size_t>(a)].count) break;
      idx[static_cast<std::size_t>(a)] = 1;
    }
  }
  return builder.finish();
}

std::vector<double> rhs_core(const MeshConfig& config, std::span<const AxisSpec> ax,
                             const ProblemSpec& problem) {
  const int dim = config.dim;
  std::int64_t total = 1;
  for (int a = 0; a < dim; ++a) total *= ax[static_cast<std::size_t>(a)].count;

  std::vector<double> rhs(static_cast<std::size_t>(total));
  std::array<int, kMaxDim> idx{};
  for (int a = 0; a < dim; ++a) idx[static_cast<std::size_t>(a)] = 1;

  for (std::int64_t lin = 0; lin < total; ++lin) {
    Coord x{};
    for (int a = 0; a < dim; ++a)
      x[static_cast<std::size_t>(a)] = config.axis_coordinate(
          a, ax[static_cast<std::size_t>(a)].origin +
                 static_cast<std::int64_t>(idx[static_cast<std::size_t>(a)]) * ax[static_cast<std::size_t>(a)].stride);

    double v = problem.source(x);

    double diag_unused = 0.0;
    for (int a = 0; a < dim; ++a) {
      const auto& s = ax[static_cast<std::size_t>(a)];
      const RowCoeffs rc = axis_coeffs(s, a, problem, x, diag_unused);
      if (idx[static_cast<std::size_t>(a)] == 1) {
        Coord xb = x;
        xb[static_cast<std::size_t>(a)] = config.axis_coordinate(a, s.origin);
        v -= rc.left * problem.boundary(xb);
      }
      if (idx[static_cast<std::size_t>(a)] == s.count && rc.has_right) {
        Coord xb = x;
        xb[static_cast<std::size_t>(a)] =
            config.axis_coordinate(a, s.origin + static_cast<std::int64_t>(s.count + 1) * s.stride);
        v -= rc.right * problem.boundary(xb);
      }
    }
    rhs[static_cast<std::size_t>(lin)] = v;

    for (int a = 0; a < dim; ++a) {
      if (++idx[static_cast<std::size_t>(a)] <= ax[static_cast<std::size_t>(a)].count) break;
      idx[static_cast<std::size_t>(a)] = 1;
    }
  }
  return rhs;
}

}  // namespace

std::pair<SparseMatrix, SparseMatrix> stencil_matrices(int n) {
  if (n < 1) throw DimensionMismatch("stencil size must be >= 1");
  SparseBuilder lb(n, n), db(n, n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) {
      lb.add(i - 1, -1.0);
      db.add(i - 1, -1.0);
    }
    lb.add(i, 2.0);
    if (i < n - 1) {
      lb.add(i + 1, -1.0);
      db.add(i + 1, 1.0);
    }
    lb.next_row();
    db.next_row();
  }
  return {lb.finish(), db.finish()};
}

SparseMatrix assemble_operator(const MeshConfig& config, const MeshKind& kind,
                               const ProblemSpec& problem) {
  if (kind.is_holes()) throw InvalidKind("holes have no single tensor operator; see assemble_hole_operator");
  check_problem(config, problem);
  const auto ax = axes_for_kind(config, kind);
  return assemble_core(config, std::span<const AxisSpec>(ax.data(), static_cast<std::size_t>(config.dim)),
                       problem);
}

GridFunction assemble_rhs(const MeshConfig& config, const MeshKind& kind, const ProblemSpec& problem) {
  if (kind.is_holes()) throw InvalidKind("holes have no standalone right-hand side");
  check_problem(config, problem);
  if (!problem.source || !problem.boundary) throw std::invalid_argument("problem lacks source or boundary data");
  const auto ax = axes_for_kind(config, kind);
  return GridFunction(kind, rhs_core(config, std::span<const AxisSpec>(ax.data(),
                                                                       static_cast<std::size_t>(config.dim)),
                                     problem));
}

SparseMatrix assemble_hole_operator(const MeshConfig& config, const ProblemSpec& problem,
                                    const HoleBlock& block) {
  check_problem(config, problem);
  const auto ax = axes_for_hole(config, block);
  return assemble_core(config, std::span<const AxisSpec>(ax.data(), static_cast<std::size_t>(config.dim)),
                       problem);
}

GridFunction residual(const SparseMatrix& A, const GridFunction& b, const GridFunction& u) {
  if (!(b.kind == u.kind)) throw InvalidKind("residual: rhs and iterate live on different meshes");
  if (A.rows() != static_cast<std::int64_t>(b.values.size()) ||
      A.cols() != static_cast<std::int64_t>(u.values.size()))
    throw DimensionMismatch("residual: size mismatch");
  GridFunction r(b.kind, A.rows());
  A.multiply(u.values, r.values);
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = b.values[i] - r.values[i];
  return r;
}

}  // namespace asdsm
