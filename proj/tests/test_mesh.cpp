#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <set>

#include "asdsm/mesh.hpp"

using namespace asdsm;

namespace {

MeshConfig cfg2(int nf, int nc) {
  const std::array<int, 2> f{nf, nf}, c{nc, nc};
  return MeshConfig::create(2, f, c);
}

MeshConfig cfg3(int nf, int nc) {
  const std::array<int, 3> f{nf, nf, nf}, c{nc, nc, nc};
  return MeshConfig::create(3, f, c);
}

}  // namespace

TEST_CASE("config derives factors and steps from the interval counts") {
  const MeshConfig m = cfg2(24, 4);
  CHECK(m.factors[0] == 5);
  CHECK(m.factors[1] == 5);
  CHECK(m.fine_steps[0] == doctest::Approx(1.0 / 25).epsilon(1e-15));
  CHECK(m.coarse_steps[1] == doctest::Approx(1.0 / 5).epsilon(1e-15));

  const MeshConfig s = cfg2(8, 2);
  CHECK(s.factors[0] == 3);
  CHECK(s.time_axis == -1);
}

TEST_CASE("incompatible interval counts are rejected") {
  const std::array<int, 2> f{10, 10}, c{4, 4};
  CHECK_THROWS_AS(MeshConfig::create(2, f, c), DivisibilityError);

  // Equal counts would make the coarse mesh the fine mesh.
  const std::array<int, 2> e{4, 4};
  CHECK_THROWS_AS(MeshConfig::create(2, e, e), DegenerateError);

  const std::array<int, 2> z{0, 0};
  CHECK_THROWS_AS(MeshConfig::create(2, z, z), DegenerateError);

  const std::array<int, 2> nc0{24, 24}, c0{0, 0};
  CHECK_THROWS_AS(MeshConfig::create(2, nc0, c0), DegenerateError);
}

TEST_CASE("point counts per kind") {
  const MeshConfig m = cfg2(8, 2);
  CHECK(m.point_count(MeshKind::fine(2)) == 64);
  CHECK(m.point_count(MeshKind::coarse(2)) == 4);
  CHECK(m.point_count(MeshKind::coarse_along(2, 1)) == 16);  // dense x, coarse y
  CHECK(m.point_count(MeshKind::coarse_along(2, 0)) == 16);
  CHECK(m.point_count(MeshKind::holes(2)) == 36);
  // skeleton = fine minus holes
  CHECK(m.point_count(MeshKind::fine(2)) - m.point_count(MeshKind::holes(2)) == 28);

  const MeshConfig t = cfg3(8, 2);
  CHECK(t.point_count(MeshKind::fine(3)) == 512);
  CHECK(t.point_count(MeshKind::coarse(3)) == 8);
  CHECK(t.point_count(MeshKind::coarse_along(3, 2)) == 128);
  CHECK(t.point_count(MeshKind::holes(3)) == 216);
}

TEST_CASE("kind helpers") {
  const MeshKind fc = MeshKind::coarse_along(2, 1);
  CHECK(fc.coarse_on(1));
  CHECK(!fc.coarse_on(0));
  CHECK(fc.single_coarse_axis() == 1);
  CHECK(MeshKind::fine(2).single_coarse_axis() == -1);
  CHECK(MeshKind::coarse(2).single_coarse_axis() == -1);
  CHECK(MeshKind::fine(3).name() == "[h,h,h]");
  CHECK(MeshKind::coarse_along(2, 0).name() == "[H,h]");
  CHECK(MeshKind::holes(2).is_holes());
  CHECK(MeshKind::from_mask(2, 3u) == MeshKind::coarse(2));
}

TEST_CASE("linear and multi index round-trip on every tensor kind") {
  const MeshConfig m = cfg2(8, 2);
  for (const MeshKind kind : {MeshKind::fine(2), MeshKind::coarse(2), MeshKind::coarse_along(2, 0),
                              MeshKind::coarse_along(2, 1)}) {
    const std::int64_t n = m.point_count(kind);
    for (std::int64_t lin = 0; lin < n; ++lin) {
      const auto idx = m.multi_index(kind, lin);
      CHECK(m.linear_index(kind, std::span<const int>(idx.data(), 2)) == lin);
    }
  }
  // axis 0 is fastest
  const std::array<int, 2> i21{2, 1};
  CHECK(m.linear_index(MeshKind::fine(2), i21) == 1);
  const std::array<int, 2> i12{1, 2};
  CHECK(m.linear_index(MeshKind::fine(2), i12) == 8);
}

TEST_CASE("out-of-range and holes indexing throw") {
  const MeshConfig m = cfg2(8, 2);
  const std::array<int, 2> zero{0, 1}, high{9, 1}, ok{1, 1};
  CHECK_THROWS_AS(m.linear_index(MeshKind::fine(2), zero), IndexOutOfRange);
  CHECK_THROWS_AS(m.linear_index(MeshKind::fine(2), high), IndexOutOfRange);
  CHECK_THROWS_AS(m.multi_index(MeshKind::fine(2), 64), IndexOutOfRange);
  CHECK_THROWS_AS(m.multi_index(MeshKind::fine(2), -1), IndexOutOfRange);
  CHECK_THROWS_AS(m.linear_index(MeshKind::holes(2), ok), InvalidKind);
  CHECK_THROWS_AS(m.multi_index(MeshKind::holes(2), 0), InvalidKind);
  CHECK_THROWS_AS(m.coordinate(MeshKind::holes(2), ok), InvalidKind);
}

TEST_CASE("coordinates are exact multiples of the fine step") {
  const MeshConfig m = cfg2(8, 2);
  const std::array<int, 2> idx{3, 6};
  const Coord xc = m.coordinate(MeshKind::fine(2), idx);
  CHECK(xc[0] == 3.0 * m.fine_steps[0]);
  CHECK(xc[1] == 6.0 * m.fine_steps[1]);
  CHECK(xc[2] == 0.0);

  // Coarse index 1 sits at global fine index factor * 1.
  const std::array<int, 2> c11{1, 1};
  const Coord cc = m.coordinate(MeshKind::coarse(2), c11);
  CHECK(cc[0] == m.axis_coordinate(0, 3));
  CHECK(cc[0] == xc[0]);  // bitwise shared node

  // Mixed kind: coarse along y only.
  const std::array<int, 2> a12{1, 2};
  const Coord ac = m.coordinate(MeshKind::coarse_along(2, 1), a12);
  CHECK(ac[0] == m.axis_coordinate(0, 1));
  CHECK(ac[1] == m.axis_coordinate(1, 6));
}

TEST_CASE("classification by coarse-line membership") {
  const MeshConfig m = cfg2(8, 2);  // factor 3
  const auto cls = [&](int i, int j) {
    const std::array<int, 2> idx{i, j};
    return classify(m, idx);
  };
  CHECK(cls(3, 3).is_cross(2));
  CHECK(cls(3, 6).is_cross(2));
  CHECK(cls(4, 6).coarse_mask == 2u);  // on a coarse y-line, dense along x
  CHECK(cls(3, 5).coarse_mask == 1u);  // on a coarse x-line, dense along y
  CHECK(cls(4, 6).is_skeleton());
  CHECK(cls(1, 1).is_hole());
  CHECK(cls(1, 1).hole == std::array<int, kMaxDim>{0, 0, 0});
  CHECK(cls(4, 4).hole == std::array<int, kMaxDim>{1, 1, 0});
  CHECK(cls(8, 7).hole == std::array<int, kMaxDim>{2, 2, 0});

  const MeshConfig t = cfg3(8, 2);
  const std::array<int, 3> p{3, 4, 6};
  CHECK(classify(t, p).coarse_mask == 5u);  // coarse lines along axes 0 and 2
}

TEST_CASE("classification counts match the product formula") {
  const MeshConfig m = cfg2(24, 4);
  std::array<std::int64_t, 4> counts{};
  for (std::int64_t lin = 0; lin < m.point_count(MeshKind::fine(2)); ++lin) {
    const auto idx = m.multi_index(MeshKind::fine(2), lin);
    counts[classify(m, std::span<const int>(idx.data(), 2)).coarse_mask]++;
  }
  CHECK(counts[3] == 16);        // cross: 4 * 4
  CHECK(counts[1] == 4 * 20);    // coarse x-line, dense y
  CHECK(counts[2] == 4 * 20);
  CHECK(counts[0] == 400);       // holes: 25 cells of 4 * 4
}

TEST_CASE("projector gathers and scatters between nested kinds") {
  const MeshConfig m = cfg2(8, 2);
  const MeshKind ff = MeshKind::fine(2), cc = MeshKind::coarse(2), fc = MeshKind::coarse_along(2, 1);

  const Projector p = build_projector(m, ff, cc);
  CHECK(p.source_size() == 64);
  CHECK(p.target_size() == 4);
  GridFunction u(ff, 64);
  std::iota(u.values.begin(), u.values.end(), 0.0);
  const GridFunction at_cc = p.apply(u);
  // Coarse (1,1) is fine (3,3): linear (3 - 1) + 8 * (3 - 1) = 18.
  CHECK(at_cc.values[0] == 18.0);
  CHECK(at_cc.values[3] == u.values[8 * 5 + 5]);

  const GridFunction back = p.apply_transpose(at_cc);
  CHECK(back.values[8 * 2 + 2] == 18.0);
  CHECK(back.values[0] == 0.0);

  // Two-step restriction agrees with the direct one.
  const Projector pf = build_projector(m, ff, fc);
  const Projector ps = build_projector(m, fc, cc);
  const GridFunction two_step = ps.apply(pf.apply(u));
  CHECK(two_step.values == at_cc.values);
}

TEST_CASE("gather after scatter is the exact identity") {
  const MeshConfig m = cfg2(24, 4);
  for (const MeshKind to : {MeshKind::coarse(2), MeshKind::coarse_along(2, 0),
                            MeshKind::coarse_along(2, 1), MeshKind::holes(2)}) {
    const Projector p = build_projector(m, MeshKind::fine(2), to);
    GridFunction w(to, p.target_size());
    for (std::size_t i = 0; i < w.values.size(); ++i) w.values[i] = static_cast<double>(7 * i + 1);
    CHECK(p.apply(p.apply_transpose(w)).values == w.values);
  }
}

TEST_CASE("non-nested kinds are rejected") {
  const MeshConfig m = cfg2(8, 2);
  CHECK_THROWS_AS(build_projector(m, MeshKind::coarse(2), MeshKind::fine(2)), NotASubmesh);
  CHECK_THROWS_AS(build_projector(m, MeshKind::coarse_along(2, 0), MeshKind::coarse_along(2, 1)),
                  NotASubmesh);
  CHECK_THROWS_AS(build_projector(m, MeshKind::holes(2), MeshKind::fine(2)), NotASubmesh);
  CHECK_THROWS_AS(build_projector(m, MeshKind::coarse(2), MeshKind::holes(2)), NotASubmesh);
}

TEST_CASE("projector overloads validate the grid-function kind") {
  const MeshConfig m = cfg2(8, 2);
  const Projector p = build_projector(m, MeshKind::fine(2), MeshKind::coarse(2));
  GridFunction wrong(MeshKind::coarse(2), 4);
  CHECK_THROWS_AS(p.apply(wrong), InvalidKind);
  GridFunction fine(MeshKind::fine(2), 64);
  CHECK_THROWS_AS(p.apply_transpose(fine), InvalidKind);
}

TEST_CASE("hole blocks tile the holes in block order") {
  const MeshConfig m = cfg2(8, 2);
  const auto blocks = hole_blocks(m);
  REQUIRE(blocks.size() == 9);
  for (const auto& b : blocks) CHECK(b.positions.size() == 4);

  CHECK(blocks[0].hole == std::array<int, kMaxDim>{0, 0, 0});
  CHECK(blocks[1].hole == std::array<int, kMaxDim>{1, 0, 0});
  CHECK(blocks[3].hole == std::array<int, kMaxDim>{0, 1, 0});
  // Block (0,0) holds fine points (1,1), (2,1), (1,2), (2,2).
  CHECK(blocks[0].positions == std::vector<std::int64_t>{0, 1, 8, 9});

  // Every hole point appears exactly once, and positions are classified holes.
  std::set<std::int64_t> seen;
  for (const auto& b : blocks)
    for (const std::int64_t p : b.positions) {
      CHECK(seen.insert(p).second);
      const auto idx = m.multi_index(MeshKind::fine(2), p);
      const PointClass pc = classify(m, std::span<const int>(idx.data(), 2));
      CHECK(pc.is_hole());
      CHECK(pc.hole == b.hole);
    }
  CHECK(static_cast<std::int64_t>(seen.size()) == m.point_count(MeshKind::holes(2)));
}

TEST_CASE("3d hole blocks are cubes in lexicographic order") {
  const MeshConfig m = cfg3(8, 2);
  const auto blocks = hole_blocks(m);
  REQUIRE(blocks.size() == 27);
  for (const auto& b : blocks) CHECK(b.positions.size() == 8);
  CHECK(blocks[1].hole == std::array<int, kMaxDim>{1, 0, 0});
  CHECK(blocks[3].hole == std::array<int, kMaxDim>{0, 1, 0});
  CHECK(blocks[9].hole == std::array<int, kMaxDim>{0, 0, 1});
}

TEST_CASE("norms") {
  const std::vector<double> v{3.0, -4.0, 0.0};
  CHECK(norm_inf(v) == 4.0);
  CHECK(norm_l2(v) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(norm_inf(std::vector<double>{}) == 0.0);
}

TEST_CASE("time axis is recorded") {
  const std::array<int, 2> f{9, 24}, c{4, 4};
  const MeshConfig m = MeshConfig::create(2, f, c, 1);
  CHECK(m.time_axis == 1);
  CHECK(m.factors[0] == 2);
  CHECK(m.factors[1] == 5);
}
