#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <random>
#include <string>

#include "asdsm/linsolve.hpp"

using namespace asdsm;

namespace {

MeshConfig cfg2(int nf, int nc) {
  const std::array<int, 2> f{nf, nf}, c{nc, nc};
  return MeshConfig::create(2, f, c);
}

ProblemSpec constant_problem() {
  ProblemSpec p;
  p.dim = 2;
  for (int a = 0; a < 2; ++a) {
    p.alpha[a] = [](const Coord&) { return 1.0; };
    p.beta[a] = [](const Coord&) { return 1.0; };
  }
  p.source = [](const Coord& x) { return x[0] + x[1]; };
  p.boundary = [](const Coord&) { return 0.0; };
  return p;
}

ProblemSpec variable_problem() {
  ProblemSpec p = constant_problem();
  p.alpha[0] = [](const Coord& x) { return 1.0 + x[0] * x[0]; };
  p.beta[1] = [](const Coord& x) { return 1.0 + x[1]; };
  return p;
}

}  // namespace

TEST_CASE("worker resolution: explicit request wins, env is the fallback") {
  CHECK(resolve_workers(0) == 0);
  CHECK(resolve_workers(1) == 1);
  CHECK(resolve_workers(7) == 7);
  CHECK(resolve_workers(1000) == 256);

  setenv("ASDSM_WORKERS", "3", 1);
  CHECK(resolve_workers(-1) == 3);
  CHECK(resolve_workers(2) == 2);  // request still wins
  setenv("ASDSM_WORKERS", "not-a-number", 1);
  CHECK(resolve_workers(-1) >= 0);  // falls back to hardware concurrency
  unsetenv("ASDSM_WORKERS");
  CHECK(resolve_workers(-1) >= 0);
}

TEST_CASE("factorization solves small systems exactly") {
  SparseBuilder b(3, 3);
  b.add(0, 2.0);
  b.add(1, -1.0);
  b.next_row();
  b.add(0, -1.0);
  b.add(1, 2.0);
  b.add(2, -1.0);
  b.next_row();
  b.add(1, -1.0);
  b.add(2, 2.0);
  b.next_row();
  const Factorization f(b.finish());
  CHECK(f.size() == 3);

  const std::vector<double> rhs{1.0, 1.0, 1.0};
  const std::vector<double> x = f.solve(rhs);
  CHECK(x[0] == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x[2] == doctest::Approx(1.5).epsilon(1e-14));

  // Solves are deterministic and repeatable bitwise.
  CHECK(f.solve(rhs) == x);
  const Factorization copy = f;  // shared state
  CHECK(copy.solve(rhs) == x);

  const std::vector<double> bad{1.0};
  CHECK_THROWS_AS(f.solve(bad), DimensionMismatch);
}

TEST_CASE("identity factorization returns the rhs") {
  const Factorization f(SparseMatrix::identity(5));
  GridFunction b(MeshKind::coarse(2), 5);
  for (std::size_t i = 0; i < 5; ++i) b.values[i] = 0.25 * static_cast<double>(i) - 1.0;
  const GridFunction x = f.solve(b);
  CHECK(x.kind == b.kind);
  CHECK(x.values == b.values);
}

TEST_CASE("singular matrices are reported") {
  SparseBuilder b(2, 2);  // rank one
  b.add(0, 1.0);
  b.add(1, 2.0);
  b.next_row();
  b.add(0, 2.0);
  b.add(1, 4.0);
  b.next_row();
  CHECK_THROWS_AS(Factorization(b.finish()), SingularMatrix);

  SparseBuilder nsq(2, 3);
  nsq.next_row();
  nsq.next_row();
  CHECK_THROWS_AS(Factorization(nsq.finish()), DimensionMismatch);
}

TEST_CASE("hole plan shares one factorization for a translation-invariant operator") {
  const MeshConfig m = cfg2(8, 2);
  const ProblemSpec p = constant_problem();
  const SparseMatrix a = assemble_operator(m, MeshKind::fine(2), p);
  const HoleSolvePlan plan(m, a, hole_blocks(m));
  CHECK(plan.shared_factorization());
  CHECK(plan.total_points() == 36);
  CHECK(plan.blocks().size() == 9);

  const SparseMatrix av = assemble_operator(m, MeshKind::fine(2), variable_problem());
  const HoleSolvePlan vplan(m, av, hole_blocks(m));
  CHECK(!vplan.shared_factorization());
}

TEST_CASE("hole solves are exact per block and independent of the worker count") {
  const MeshConfig m = cfg2(8, 2);
  const SparseMatrix a = assemble_operator(m, MeshKind::fine(2), variable_problem());
  const HoleSolvePlan plan(m, a, hole_blocks(m));

  std::vector<double> rhs(36);
  std::mt19937_64 eng(7);
  for (auto& v : rhs) v = static_cast<double>(eng() >> 11) * 0x1.0p-53 - 0.5;

  const std::vector<double> serial = plan.solve(rhs, 0);
  CHECK(plan.solve(rhs, 1) == serial);
  CHECK(plan.solve(rhs, 4) == serial);
  CHECK(plan.solve(rhs, 13) == serial);  // more workers than blocks

  // Each block satisfies its own extracted system.
  std::int64_t off = 0;
  for (const auto& blk : plan.blocks()) {
    const SparseMatrix sub = a.extract_block(blk.positions);
    const auto n = static_cast<std::int64_t>(blk.positions.size());
    const std::vector<double> x(serial.begin() + off, serial.begin() + off + n);
    const std::vector<double> ax = sub.multiply(x);
    for (std::int64_t i = 0; i < n; ++i)
      CHECK(ax[static_cast<std::size_t>(i)] ==
            doctest::Approx(rhs[static_cast<std::size_t>(off + i)]).epsilon(1e-12));
    off += n;
  }

  const GridFunction zero(MeshKind::holes(2), 36);
  const GridFunction sol = solve_holes(m, a, zero, hole_blocks(m));
  for (const double v : sol.values) CHECK(v == 0.0);

  GridFunction wrong(MeshKind::fine(2), 64);
  CHECK_THROWS_AS(solve_holes(m, a, wrong, hole_blocks(m)), InvalidKind);
}

TEST_CASE("a singular hole block is reported with its hole index") {
  const MeshConfig m = cfg2(8, 2);
  SparseBuilder b(64, 64);
  for (int i = 0; i < 64; ++i) {
    const bool in_first_hole = (i == 0 || i == 1 || i == 8 || i == 9);
    b.add(i, in_first_hole ? 0.0 : 1.0);
    b.next_row();
  }
  const SparseMatrix a = b.finish();
  try {
    const HoleSolvePlan plan(m, a, hole_blocks(m));
    FAIL("expected SingularMatrix");
  } catch (const SingularMatrix& e) {
    CHECK(std::string(e.what()).find("hole (0,0)") != std::string::npos);
  }
}

TEST_CASE("direct fine solve matches the assemble-factor-solve path bitwise") {
  const MeshConfig m = cfg2(8, 2);
  const ProblemSpec p = variable_problem();
  const GridFunction direct = oracle_solve_fine(m, p);
  const GridFunction manual =
      Factorization(assemble_operator(m, MeshKind::fine(2), p)).solve(assemble_rhs(m, MeshKind::fine(2), p));
  CHECK(direct.values == manual.values);
  CHECK(norm_inf(direct) > 0.0);
}
