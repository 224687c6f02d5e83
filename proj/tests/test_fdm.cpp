#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "asdsm/fdm.hpp"

using namespace asdsm;

namespace {

MeshConfig cfg2(int nf, int nc, int time_axis = -1) {
  const std::array<int, 2> f{nf, nf}, c{nc, nc};
  return MeshConfig::create(2, f, c, time_axis);
}

ProblemSpec variable_steady() {
  ProblemSpec p;
  p.dim = 2;
  p.alpha[0] = [](const Coord& x) { return 1.0 + x[0] * x[0]; };
  p.alpha[1] = [](const Coord& x) { return 2.0 + x[0] * x[1]; };
  p.beta[0] = [](const Coord& x) { return 2.0 - x[0]; };
  p.beta[1] = [](const Coord& x) { return 1.0 + x[1]; };
  p.source = [](const Coord&) { return 0.0; };
  p.boundary = [](const Coord&) { return 0.0; };
  return p;
}

ProblemSpec variable_time() {
  ProblemSpec p;
  p.dim = 2;
  p.time_dependent = true;
  p.alpha[0] = [](const Coord& x) { return 1.0 + x[0] * x[0]; };
  p.beta[0] = [](const Coord& x) { return 2.0 - x[0]; };
  p.source = [](const Coord&) { return 0.0; };
  p.boundary = [](const Coord&) { return 0.0; };
  return p;
}

// Row-by-row stencil oracle mirroring the advertised discretization: centered
// second and first differences with coefficients frozen at the row's node,
// backward two-point difference on the time axis.
SparseMatrix stencil_oracle(const MeshConfig& config, const MeshKind& kind,
                            const ProblemSpec& problem) {
  const int dim = config.dim;
  std::array<int, kMaxDim> counts{};
  std::array<std::int64_t, kMaxDim> stride{};
  std::int64_t total = 1;
  for (int a = 0; a < dim; ++a) {
    counts[a] = config.axis_points(kind, a);
    stride[a] = total;
    total *= counts[a];
  }
  SparseBuilder b(total, total);
  for (std::int64_t lin = 0; lin < total; ++lin) {
    const auto idx = config.multi_index(kind, lin);
    const Coord x = config.coordinate(kind, std::span<const int>(idx.data(), dim));
    double diag = 0.0;
    std::array<double, kMaxDim> left{}, right{};
    std::array<bool, kMaxDim> has_right{};
    for (int a = 0; a < dim; ++a) {
      const double h = kind.coarse_on(a) ? config.coarse_steps[a] : config.fine_steps[a];
      if (a == config.time_axis) {
        diag += 1.0 / h;
        left[a] = -1.0 / h;
        has_right[a] = false;
      } else {
        const double c = problem.alpha[a](x) / (h * h);
        const double d = problem.beta[a](x) / (2.0 * h);
        diag += 2.0 * c;
        left[a] = -c - d;
        right[a] = -c + d;
        has_right[a] = true;
      }
    }
    for (int a = dim - 1; a >= 0; --a)
      if (idx[a] > 1) b.add(lin - stride[a], left[a]);
    b.add(lin, diag);
    for (int a = 0; a < dim; ++a)
      if (idx[a] < counts[a] && has_right[a]) b.add(lin + stride[a], right[a]);
    b.next_row();
  }
  return b.finish();
}

// Max |b - A u*| over the rows, with u* sampled from `exact`.
double residual_at_exact(const MeshConfig& config, const MeshKind& kind, const ProblemSpec& problem) {
  const SparseMatrix a = assemble_operator(config, kind, problem);
  const GridFunction rhs = assemble_rhs(config, kind, problem);
  GridFunction u(kind, config.point_count(kind));
  for (std::int64_t lin = 0; lin < config.point_count(kind); ++lin) {
    const auto idx = config.multi_index(kind, lin);
    u.values[static_cast<std::size_t>(lin)] =
        problem.exact(config.coordinate(kind, std::span<const int>(idx.data(), config.dim)));
  }
  return norm_inf(residual(a, rhs, u));
}

}  // namespace

TEST_CASE("1d stencil matrices") {
  const auto [l, d] = stencil_matrices(3);
  CHECK(l.multiply(std::vector<double>{1.0, 1.0, 1.0}) == std::vector<double>{1.0, 0.0, 1.0});
  CHECK(l.row_vals(1)[0] == -1.0);
  CHECK(l.row_vals(1)[1] == 2.0);
  CHECK(d.multiply(std::vector<double>{1.0, 2.0, 3.0}) == std::vector<double>{2.0, 2.0, -2.0});
  CHECK(d.row_cols(0).size() == 1);  // no diagonal entry in the first-derivative stencil
  CHECK_THROWS_AS(stencil_matrices(0), DimensionMismatch);
}

TEST_CASE("assembly matches the stencil oracle entrywise") {
  const MeshConfig m = cfg2(5, 2);
  const ProblemSpec p = variable_steady();
  for (const MeshKind kind : {MeshKind::fine(2), MeshKind::coarse(2), MeshKind::coarse_along(2, 0),
                              MeshKind::coarse_along(2, 1)}) {
    CHECK(assemble_operator(m, kind, p) == stencil_oracle(m, kind, p));
  }
}

TEST_CASE("time-axis assembly matches the oracle and never couples forward") {
  const MeshConfig m = cfg2(5, 2, 1);
  const ProblemSpec p = variable_time();
  const MeshKind fine = MeshKind::fine(2);
  const SparseMatrix a = assemble_operator(m, fine, p);
  CHECK(a == stencil_oracle(m, fine, p));

  for (std::int64_t r = 0; r < a.rows(); ++r) {
    const int t_row = m.multi_index(fine, r)[1];
    for (const std::int64_t c : a.row_cols(r)) {
      const int t_col = m.multi_index(fine, c)[1];
      CHECK(t_col <= t_row);
      CHECK(t_col >= t_row - 1);
    }
  }
}

TEST_CASE("affine and quadratic solutions are reproduced to rounding") {
  const MeshConfig m = cfg2(14, 4);
  ProblemSpec p = variable_steady();
  p.exact = [](const Coord& x) { return x[0] * x[0] + 3.0 * x[0] * x[1] + x[1] - 2.0; };
  p.boundary = p.exact;
  // -a1 u_xx - a2 u_yy + b1 u_x + b2 u_y with u as above.
  p.source = [&](const Coord& x) {
    return -2.0 * (1.0 + x[0] * x[0]) + (2.0 - x[0]) * (2.0 * x[0] + 3.0 * x[1]) +
           (1.0 + x[1]) * (3.0 * x[0] + 1.0);
  };
  for (const MeshKind kind : {MeshKind::fine(2), MeshKind::coarse(2), MeshKind::coarse_along(2, 0)})
    CHECK(residual_at_exact(m, kind, p) < 1e-9);
}

TEST_CASE("solutions linear in time are reproduced to rounding") {
  const MeshConfig m = cfg2(14, 4, 1);
  ProblemSpec p = variable_time();
  p.exact = [](const Coord& x) { return x[0] * x[0] - 0.5 * x[1] + 1.0; };
  p.boundary = p.exact;
  // u_t - a1 u_xx + b1 u_x.
  p.source = [](const Coord& x) {
    return -0.5 - 2.0 * (1.0 + x[0] * x[0]) + (2.0 - x[0]) * 2.0 * x[0];
  };
  CHECK(residual_at_exact(m, MeshKind::fine(2), p) < 1e-9);
  CHECK(residual_at_exact(m, MeshKind::coarse_along(2, 1), p) < 1e-9);
}

TEST_CASE("standalone hole assembly equals the extracted diagonal block") {
  const ProblemSpec steady = variable_steady();
  const MeshConfig m = cfg2(14, 4);
  const SparseMatrix a = assemble_operator(m, MeshKind::fine(2), steady);
  for (const HoleBlock& blk : hole_blocks(m))
    CHECK(assemble_hole_operator(m, steady, blk) == a.extract_block(blk.positions));

  const ProblemSpec intime = variable_time();
  const MeshConfig mt = cfg2(14, 4, 1);
  const SparseMatrix at = assemble_operator(mt, MeshKind::fine(2), intime);
  for (const HoleBlock& blk : hole_blocks(mt))
    CHECK(assemble_hole_operator(mt, intime, blk) == at.extract_block(blk.positions));
}

TEST_CASE("boundary lifting feeds edge rows only") {
  const MeshConfig m = cfg2(5, 2);
  ProblemSpec p = variable_steady();
  p.boundary = [](const Coord& x) { return x[0] + 2.0 * x[1]; };
  const GridFunction b = assemble_rhs(m, MeshKind::fine(2), p);
  // Interior rows away from the boundary see only the (zero) source.
  const std::array<int, 2> mid{3, 3};
  CHECK(b.values[static_cast<std::size_t>(m.linear_index(MeshKind::fine(2), mid))] == 0.0);
  const std::array<int, 2> corner{1, 1};
  CHECK(b.values[static_cast<std::size_t>(m.linear_index(MeshKind::fine(2), corner))] != 0.0);
}

TEST_CASE("assembly rejects bad input") {
  const MeshConfig m = cfg2(5, 2);
  const ProblemSpec p = variable_steady();
  CHECK_THROWS_AS(assemble_operator(m, MeshKind::holes(2), p), InvalidKind);
  CHECK_THROWS_AS(assemble_rhs(m, MeshKind::holes(2), p), InvalidKind);

  ProblemSpec timeless = variable_steady();
  const MeshConfig mt = cfg2(5, 2, 1);
  CHECK_THROWS_AS(assemble_operator(mt, MeshKind::fine(2), timeless), DimensionMismatch);

  ProblemSpec bad = variable_steady();
  bad.alpha[0] = [](const Coord& x) { return 0.4 - x[0]; };  // not positive everywhere
  CHECK_THROWS_AS(assemble_operator(m, MeshKind::fine(2), bad), std::domain_error);
}

TEST_CASE("residual definition") {
  const MeshConfig m = cfg2(5, 2);
  const SparseMatrix id = SparseMatrix::identity(25);
  GridFunction b(MeshKind::fine(2), 25), u(MeshKind::fine(2), 25);
  for (std::size_t i = 0; i < 25; ++i) {
    b.values[i] = static_cast<double>(i);
    u.values[i] = 1.0;
  }
  const GridFunction r = residual(id, b, u);
  CHECK(r.values[0] == -1.0);
  CHECK(r.values[24] == 23.0);

  GridFunction wrong(MeshKind::coarse(2), 4);
  CHECK_THROWS_AS(residual(id, b, wrong), InvalidKind);
}
