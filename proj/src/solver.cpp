#include "asdsm/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "asdsm/spline.hpp"

namespace asdsm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Linearizer over a tensor kind; unused trailing axes contribute nothing, so
// a 2D caller can leave idx[2] at its default.
struct Lin {
  std::array<std::int64_t, kMaxDim> stride{};
  Lin(const MeshConfig& c, const MeshKind& k) {
    std::int64_t s = 1;
    for (int a = 0; a < c.dim; ++a) {
      stride[static_cast<std::size_t>(a)] = s;
      s *= c.axis_points(k, a);
    }
  }
  std::int64_t operator()(const std::array<int, kMaxDim>& idx) const {
    std::int64_t p = 0;
    for (int a = 0; a < kMaxDim; ++a)
      p += static_cast<std::int64_t>(idx[static_cast<std::size_t>(a)] - 1) * stride[static_cast<std::size_t>(a)];
    return p;
  }
};

std::vector<double> coarse_knots(const MeshConfig& c, int axis) {
  std::vector<double> x(static_cast<std::size_t>(c.coarse_counts[static_cast<std::size_t>(axis)]));
  for (int C = 1; C <= c.coarse_counts[static_cast<std::size_t>(axis)]; ++C)
    x[static_cast<std::size_t>(C - 1)] =
        c.axis_coordinate(axis, static_cast<std::int64_t>(C) * c.factors[static_cast<std::size_t>(axis)]);
  return x;
}

std::vector<double> fine_coords(const MeshConfig& c, int axis) {
  std::vector<double> x(static_cast<std::size_t>(c.fine_counts[static_cast<std::size_t>(axis)]));
  for (int i = 1; i <= c.fine_counts[static_cast<std::size_t>(axis)]; ++i)
    x[static_cast<std::size_t>(i - 1)] = c.axis_coordinate(axis, i);
  return x;
}

void check_kind(const GridFunction& g, const MeshKind& expected, const MeshConfig& c, const char* what) {
  if (!(g.kind == expected))
    throw InvalidKind(std::string(what) + ": expected " + expected.name() + ", got " + g.kind.name());
  if (static_cast<std::int64_t>(g.values.size()) != c.point_count(expected))
    throw DimensionMismatch(std::string(what) + ": value count does not match the mesh");
}

std::vector<std::int64_t> skeleton_row_list(const MeshConfig& c) {
  const MeshKind fine = MeshKind::fine(c.dim);
  const std::int64_t total = c.point_count(fine);
  std::vector<std::int64_t> rows;
  std::array<int, kMaxDim> idx{1, 1, 1};
  for (std::int64_t lin = 0; lin < total; ++lin) {
    bool skeleton = false;
    for (int a = 0; a < c.dim; ++a)
      if (idx[static_cast<std::size_t>(a)] % c.factors[static_cast<std::size_t>(a)] == 0) {
        skeleton = true;
        break;
      }
    if (skeleton) rows.push_back(lin);
    for (int a = 0; a < c.dim; ++a) {
      if (++idx[static_cast<std::size_t>(a)] <= c.fine_counts[static_cast<std::size_t>(a)]) break;
      idx[static_cast<std::size_t>(a)] = 1;
    }
  }
  return rows;
}

void normalize_or_throw(GridFunction& g, const char* what) {
  const double n = norm_l2(g);
  if (!(n > 0.0))
    throw ZeroNormSolution(std::string(what) + ": zero-norm solution cannot be normalized");
  for (double& v : g.values) v /= n;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t k) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (k + 1);
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

GridFunction richardson_extrapolate(const GridFunction& u1_cc, const GridFunction& u2_cc,
                                    const GridFunction& u_cc) {
  if (!(u1_cc.kind == u2_cc.kind) || !(u1_cc.kind == u_cc.kind) || !u1_cc.kind.is_coarse())
    throw InvalidKind("extrapolation inputs must all live on the coarse mesh");
  if (u1_cc.values.size() != u2_cc.values.size() || u1_cc.values.size() != u_cc.values.size())
    throw DimensionMismatch("extrapolation inputs differ in size");
  GridFunction out(u_cc.kind, static_cast<std::int64_t>(u_cc.values.size()));
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = u1_cc.values[i] + u2_cc.values[i] - u_cc.values[i];
  return out;
}

GridFunction choose_cross_points(const SkeletonInputs& inputs, const MeshConfig& config,
                                 std::uint64_t rng_seed) {
  const MeshKind cc = MeshKind::coarse(2);
  check_kind(inputs.u_fc, MeshKind::coarse_along(2, 1), config, "choose_cross_points u_fc");
  check_kind(inputs.u_cf, MeshKind::coarse_along(2, 0), config, "choose_cross_points u_cf");
  // Candidates ordered by the coarse axis of their source mesh.
  GridFunction c0 = build_projector(config, inputs.u_cf.kind, cc).apply(inputs.u_cf);
  GridFunction c1 = build_projector(config, inputs.u_fc.kind, cc).apply(inputs.u_fc);
  std::mt19937_64 eng(rng_seed);
  return (eng() % 2 == 0) ? std::move(c0) : std::move(c1);
}

GridFunction spline_correct(const GridFunction& u_aniso, const GridFunction& e_cc, int dense_axis,
                            const MeshConfig& config) {
  if (config.dim != 2) throw InvalidKind("spline correction applies to the 2D anisotropic meshes");
  if (dense_axis < 0 || dense_axis > 1) throw IndexOutOfRange("dense_axis must be 0 or 1");
  const int other = 1 - dense_axis;
  const MeshKind aniso = MeshKind::coarse_along(2, other);
  const MeshKind cc = MeshKind::coarse(2);
  check_kind(u_aniso, aniso, config, "spline_correct input");
  check_kind(e_cc, cc, config, "spline_correct correction");

  const auto knots = coarse_knots(config, dense_axis);
  const auto xs = fine_coords(config, dense_axis);
  const Lin la(config, aniso), lc(config, cc);

  GridFunction out = u_aniso;
  std::vector<double> vals(knots.size());
  std::array<int, kMaxDim> idx{1, 1, 1};
  for (int J = 1; J <= config.coarse_counts[static_cast<std::size_t>(other)]; ++J) {
    idx[static_cast<std::size_t>(other)] = J;
    for (int C = 1; C <= config.coarse_counts[static_cast<std::size_t>(dense_axis)]; ++C) {
      idx[static_cast<std::size_t>(dense_axis)] = C;
      vals[static_cast<std::size_t>(C - 1)] = e_cc.values[static_cast<std::size_t>(lc(idx))];
    }
    const CubicSpline s = zero_clamped_spline(knots, vals);
    for (int i = 1; i <= config.fine_counts[static_cast<std::size_t>(dense_axis)]; ++i) {
      idx[static_cast<std::size_t>(dense_axis)] = i;
      out.values[static_cast<std::size_t>(la(idx))] += s(xs[static_cast<std::size_t>(i - 1)]);
    }
  }
  return out;
}

GridFunction build_skeleton(const SkeletonInputs& inputs, const MeshConfig& config,
                            std::uint64_t rng_seed) {
  if (config.dim != 2) throw InvalidKind("build_skeleton is the 2D path; merge_3d handles 3D");
  const MeshKind fc = MeshKind::coarse_along(2, 1);  // dense x
  const MeshKind cf = MeshKind::coarse_along(2, 0);  // dense y
  const MeshKind cc = MeshKind::coarse(2);
  const MeshKind ff = MeshKind::fine(2);
  check_kind(inputs.u_fc, fc, config, "build_skeleton u_fc");
  check_kind(inputs.u_cf, cf, config, "build_skeleton u_cf");
  if (inputs.u_cc.has_value() == inputs.normalized)
    throw InvalidKind("coarse solution must be present exactly for unnormalized inputs");

  const Projector p_fc_cc = build_projector(config, fc, cc);
  const Projector p_cf_cc = build_projector(config, cf, cc);
  GridFunction u_hat = [&] {
    if (inputs.u_cc) {
      check_kind(*inputs.u_cc, cc, config, "build_skeleton u_cc");
      return richardson_extrapolate(p_fc_cc.apply(inputs.u_fc), p_cf_cc.apply(inputs.u_cf), *inputs.u_cc);
    }
    return choose_cross_points(inputs, config, rng_seed);
  }();

  GridFunction e1 = u_hat, e2 = u_hat;
  {
    const GridFunction u1 = p_fc_cc.apply(inputs.u_fc);
    const GridFunction u2 = p_cf_cc.apply(inputs.u_cf);
    for (std::size_t i = 0; i < u_hat.values.size(); ++i) {
      e1.values[i] = u_hat.values[i] - u1.values[i];
      e2.values[i] = u_hat.values[i] - u2.values[i];
    }
  }

  const GridFunction ut_fc = spline_correct(inputs.u_fc, e1, 0, config);
  const GridFunction ut_cf = spline_correct(inputs.u_cf, e2, 1, config);

  GridFunction out(ff, config.point_count(ff));
  build_projector(config, ff, fc).scatter_add(ut_fc.values, out.values);
  build_projector(config, ff, cf).scatter_add(ut_cf.values, out.values);
  GridFunction dup = p_cf_cc.apply(ut_cf);
  for (double& v : dup.values) v = -v;
  build_projector(config, ff, cc).scatter_add(dup.values, out.values);
  return out;
}

namespace {

// Boolean-sum (transfinite) correction of one slab plane: two line families
// pinned by the pairwise targets plus the tensor term pinned by the triple
// target. Because the targets agree bitwise at triple points, the spline
// terms cancel exactly on the pinned lines.
void correct_slab_plane(const MeshConfig& config, int a, int I, const GridFunction& T1,
                        const GridFunction& T2, const GridFunction& u_hat, GridFunction& slab) {
  const int f1 = (a == 0) ? 1 : 0;
  const int f2 = (a == 2) ? 1 : 2;
  const MeshKind pair1 = MeshKind::from_mask(3, (1u << a) | (1u << f1));
  const MeshKind pair2 = MeshKind::from_mask(3, (1u << a) | (1u << f2));
  const MeshKind triple = MeshKind::coarse(3);

  const Lin lp1(config, pair1), lp2(config, pair2), lt(config, triple), ls(config, slab.kind);
  const int nc1 = config.coarse_counts[static_cast<std::size_t>(f1)];
  const int nc2 = config.coarse_counts[static_cast<std::size_t>(f2)];
  const int nf1 = config.fine_counts[static_cast<std::size_t>(f1)];
  const int nf2 = config.fine_counts[static_cast<std::size_t>(f2)];
  const int n1 = config.factors[static_cast<std::size_t>(f1)];
  const int n2 = config.factors[static_cast<std::size_t>(f2)];

  const auto knots1 = coarse_knots(config, f1);
  const auto knots2 = coarse_knots(config, f2);
  const auto xs1 = fine_coords(config, f1);
  const auto xs2 = fine_coords(config, f2);

  const auto at = [](int a0, int v0, int a1, int v1, int a2, int v2) {
    std::array<int, kMaxDim> idx{1, 1, 1};
    idx[static_cast<std::size_t>(a0)] = v0;
    idx[static_cast<std::size_t>(a1)] = v1;
    idx[static_cast<std::size_t>(a2)] = v2;
    return idx;
  };

  std::vector<double> d(static_cast<std::size_t>(nf1) * static_cast<std::size_t>(nf2), 0.0);

  // Lines along f2 at coarse f1 stations.
  {
    std::vector<double> vals(static_cast<std::size_t>(nc1));
    for (int k2 = 1; k2 <= nf2; ++k2) {
      for (int C1 = 1; C1 <= nc1; ++C1)
        vals[static_cast<std::size_t>(C1 - 1)] =
            T1.values[static_cast<std::size_t>(lp1(at(a, I, f1, C1, f2, k2)))] -
            slab.values[static_cast<std::size_t>(ls(at(a, I, f1, C1 * n1, f2, k2)))];
      const CubicSpline s = zero_clamped_spline(knots1, vals);
      for (int k1 = 1; k1 <= nf1; ++k1)
        d[static_cast<std::size_t>(k1 - 1) + static_cast<std::size_t>(nf1) * static_cast<std::size_t>(k2 - 1)] +=
            s(xs1[static_cast<std::size_t>(k1 - 1)]);
    }
  }
  // Lines along f1 at coarse f2 stations.
  {
    std::vector<double> vals(static_cast<std::size_t>(nc2));
    for (int k1 = 1; k1 <= nf1; ++k1) {
      for (int C2 = 1; C2 <= nc2; ++C2)
        vals[static_cast<std::size_t>(C2 - 1)] =
            T2.values[static_cast<std::size_t>(lp2(at(a, I, f1, k1, f2, C2)))] -
            slab.values[static_cast<std::size_t>(ls(at(a, I, f1, k1, f2, C2 * n2)))];
      const CubicSpline s = zero_clamped_spline(knots2, vals);
      for (int k2 = 1; k2 <= nf2; ++k2)
        d[static_cast<std::size_t>(k1 - 1) + static_cast<std::size_t>(nf1) * static_cast<std::size_t>(k2 - 1)] +=
            s(xs2[static_cast<std::size_t>(k2 - 1)]);
    }
  }
  // Tensor term through the cross values pinned by the triple target.
  {
    std::vector<double> g(static_cast<std::size_t>(nf1) * static_cast<std::size_t>(nc2));
    std::vector<double> vals1(static_cast<std::size_t>(nc1));
    for (int C2 = 1; C2 <= nc2; ++C2) {
      for (int C1 = 1; C1 <= nc1; ++C1)
        vals1[static_cast<std::size_t>(C1 - 1)] =
            u_hat.values[static_cast<std::size_t>(lt(at(a, I, f1, C1, f2, C2)))] -
            slab.values[static_cast<std::size_t>(ls(at(a, I, f1, C1 * n1, f2, C2 * n2)))];
      const CubicSpline s = zero_clamped_spline(knots1, vals1);
      for (int k1 = 1; k1 <= nf1; ++k1)
        g[static_cast<std::size_t>(k1 - 1) + static_cast<std::size_t>(nf1) * static_cast<std::size_t>(C2 - 1)] =
            s(xs1[static_cast<std::size_t>(k1 - 1)]);
    }
    std::vector<double> vals2(static_cast<std::size_t>(nc2));
    for (int k1 = 1; k1 <= nf1; ++k1) {
      for (int C2 = 1; C2 <= nc2; ++C2)
        vals2[static_cast<std::size_t>(C2 - 1)] =
            g[static_cast<std::size_t>(k1 - 1) + static_cast<std::size_t>(nf1) * static_cast<std::size_t>(C2 - 1)];
      const CubicSpline s = zero_clamped_spline(knots2, vals2);
      for (int k2 = 1; k2 <= nf2; ++k2)
        d[static_cast<std::size_t>(k1 - 1) + static_cast<std::size_t>(nf1) * static_cast<std::size_t>(k2 - 1)] -=
            s(xs2[static_cast<std::size_t>(k2 - 1)]);
    }
  }

  for (int k2 = 1; k2 <= nf2; ++k2)
    for (int k1 = 1; k1 <= nf1; ++k1)
      slab.values[static_cast<std::size_t>(ls(at(a, I, f1, k1, f2, k2)))] +=
          d[static_cast<std::size_t>(k1 - 1) + static_cast<std::size_t>(nf1) * static_cast<std::size_t>(k2 - 1)];
}

}  // namespace

GridFunction merge_3d(const GridFunction& u_x, const GridFunction& u_y, const GridFunction& u_z,
                      const std::optional<GridFunction>& u_ccc, const MeshConfig& config,
                      std::uint64_t rng_seed) {
  if (config.dim != 3) throw InvalidKind("merge_3d requires a 3D mesh");
  const MeshKind triple = MeshKind::coarse(3);
  const MeshKind ff = MeshKind::fine(3);
  const std::array<const GridFunction*, 3> u{&u_x, &u_y, &u_z};
  std::array<MeshKind, 3> slab{MeshKind::coarse_along(3, 0), MeshKind::coarse_along(3, 1),
                               MeshKind::coarse_along(3, 2)};
  for (int a = 0; a < 3; ++a) check_kind(*u[static_cast<std::size_t>(a)], slab[static_cast<std::size_t>(a)], config, "merge_3d slab");
  if (u_ccc) check_kind(*u_ccc, triple, config, "merge_3d u_ccc");

  std::mt19937_64 eng(rng_seed);

  std::array<GridFunction, 3> s{};
  for (int a = 0; a < 3; ++a)
    s[static_cast<std::size_t>(a)] =
        build_projector(config, slab[static_cast<std::size_t>(a)], triple).apply(*u[static_cast<std::size_t>(a)]);

  GridFunction u_hat(triple, config.point_count(triple));
  if (u_ccc) {
    for (std::size_t i = 0; i < u_hat.values.size(); ++i)
      u_hat.values[i] = (s[0].values[i] + s[1].values[i] + s[2].values[i] - u_ccc->values[i]) / 2.0;
  } else {
    u_hat = s[static_cast<std::size_t>(eng() % 3)];
  }

  // Pairwise targets, pair slot (a,b) -> a + b - 1.
  std::array<GridFunction, 3> T{};
  const Lin lt(config, triple);
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      const int f = 3 - a - b;
      const MeshKind pk = MeshKind::from_mask(3, (1u << a) | (1u << b));
      const GridFunction ua_p = build_projector(config, slab[static_cast<std::size_t>(a)], pk).apply(*u[static_cast<std::size_t>(a)]);
      const GridFunction ub_p = build_projector(config, slab[static_cast<std::size_t>(b)], pk).apply(*u[static_cast<std::size_t>(b)]);

      GridFunction base(pk, config.point_count(pk));
      GridFunction base_t(triple, config.point_count(triple));
      if (u_ccc) {
        for (std::size_t i = 0; i < base.values.size(); ++i)
          base.values[i] = (ua_p.values[i] + ub_p.values[i]) / 2.0;
        for (std::size_t i = 0; i < base_t.values.size(); ++i)
          base_t.values[i] = (s[static_cast<std::size_t>(a)].values[i] + s[static_cast<std::size_t>(b)].values[i]) / 2.0;
      } else {
        const bool pick_b = (eng() % 2) != 0;
        base = pick_b ? ub_p : ua_p;
        base_t = pick_b ? s[static_cast<std::size_t>(b)] : s[static_cast<std::size_t>(a)];
      }

      GridFunction corr = u_hat;
      for (std::size_t i = 0; i < corr.values.size(); ++i) corr.values[i] -= base_t.values[i];

      const Lin lp(config, pk);
      const auto knots = coarse_knots(config, f);
      const auto xs = fine_coords(config, f);
      const int nca = config.coarse_counts[static_cast<std::size_t>(a)];
      const int ncb = config.coarse_counts[static_cast<std::size_t>(b)];
      const int ncf = config.coarse_counts[static_cast<std::size_t>(f)];
      const int nff = config.fine_counts[static_cast<std::size_t>(f)];
      const int nf_factor = config.factors[static_cast<std::size_t>(f)];
      std::vector<double> vals(static_cast<std::size_t>(ncf));
      std::array<int, kMaxDim> idx{1, 1, 1};
      for (int Cb = 1; Cb <= ncb; ++Cb) {
        idx[static_cast<std::size_t>(b)] = Cb;
        for (int Ca = 1; Ca <= nca; ++Ca) {
          idx[static_cast<std::size_t>(a)] = Ca;
          for (int Cf = 1; Cf <= ncf; ++Cf) {
            idx[static_cast<std::size_t>(f)] = Cf;
            vals[static_cast<std::size_t>(Cf - 1)] = corr.values[static_cast<std::size_t>(lt(idx))];
          }
          const CubicSpline sp = zero_clamped_spline(knots, vals);
          for (int kf = 1; kf <= nff; ++kf) {
            idx[static_cast<std::size_t>(f)] = kf;
            base.values[static_cast<std::size_t>(lp(idx))] += sp(xs[static_cast<std::size_t>(kf - 1)]);
          }
          // Pin the triple stations bitwise so the slab corrections telescope.
          for (int Cf = 1; Cf <= ncf; ++Cf) {
            idx[static_cast<std::size_t>(f)] = Cf * nf_factor;
            const std::int64_t p = lp(idx);
            idx[static_cast<std::size_t>(f)] = Cf;
            base.values[static_cast<std::size_t>(p)] = u_hat.values[static_cast<std::size_t>(lt(idx))];
          }
        }
      }
      T[static_cast<std::size_t>(a + b - 1)] = std::move(base);
    }
  }

  // Corrected slabs via per-plane Boolean sums.
  std::array<GridFunction, 3> corrected{*u[0], *u[1], *u[2]};
  for (int a = 0; a < 3; ++a) {
    const int f1 = (a == 0) ? 1 : 0;
    const int f2 = (a == 2) ? 1 : 2;
    const GridFunction& T1 = T[static_cast<std::size_t>(std::min(a, f1) + std::max(a, f1) - 1)];
    const GridFunction& T2 = T[static_cast<std::size_t>(std::min(a, f2) + std::max(a, f2) - 1)];
    for (int I = 1; I <= config.coarse_counts[static_cast<std::size_t>(a)]; ++I)
      correct_slab_plane(config, a, I, T1, T2, u_hat, corrected[static_cast<std::size_t>(a)]);
  }

  GridFunction out(ff, config.point_count(ff));
  for (int a = 0; a < 3; ++a)
    build_projector(config, ff, slab[static_cast<std::size_t>(a)])
        .scatter_add(corrected[static_cast<std::size_t>(a)].values, out.values);
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const MeshKind pk = MeshKind::from_mask(3, (1u << a) | (1u << b));
      GridFunction neg = T[static_cast<std::size_t>(a + b - 1)];
      for (double& v : neg.values) v = -v;
      build_projector(config, ff, pk).scatter_add(neg.values, out.values);
    }
  build_projector(config, ff, triple).scatter_add(u_hat.values, out.values);
  return out;
}

namespace {

GridFunction fill_core(const MeshConfig& config, const SparseMatrix& A, const GridFunction& skeleton,
                       std::span<const double> b, const HoleSolvePlan& plan, int workers) {
  std::vector<double> rhs(static_cast<std::size_t>(plan.total_points()));
  std::int64_t t = 0;
  for (const HoleBlock& blk : plan.blocks())
    for (const std::int64_t p : blk.positions) {
      if (std::abs(skeleton.values[static_cast<std::size_t>(p)]) > 1e-14)
        throw SkeletonNotHollow("skeleton carries a nonzero value inside a hole");
      const double bp = b.empty() ? 0.0 : b[static_cast<std::size_t>(p)];
      rhs[static_cast<std::size_t>(t++)] = bp - A.row_dot(p, skeleton.values);
    }

  const std::vector<double> v = plan.solve(rhs, workers);
  GridFunction out = skeleton;
  t = 0;
  for (const HoleBlock& blk : plan.blocks())
    for (const std::int64_t p : blk.positions) out.values[static_cast<std::size_t>(p)] = v[static_cast<std::size_t>(t++)];
  return out;
}

}  // namespace

GridFunction fill_holes(const GridFunction& skeleton, const SparseMatrix& A_ff,
                        const GridFunction& b_ff, const MeshConfig& config, int workers) {
  const MeshKind ff = MeshKind::fine(config.dim);
  check_kind(skeleton, ff, config, "fill_holes skeleton");
  check_kind(b_ff, ff, config, "fill_holes rhs");
  if (A_ff.rows() != static_cast<std::int64_t>(skeleton.values.size()) || A_ff.rows() != A_ff.cols())
    throw DimensionMismatch("fill_holes: operator size mismatch");
  const HoleSolvePlan plan(config, A_ff, hole_blocks(config));
  return fill_core(config, A_ff, skeleton, b_ff.values, plan, workers);
}

double optimal_scaling(const MeshConfig& config, const GridFunction& r, const SparseMatrix& A_ff,
                       const GridFunction& e_tilde, double subsample, std::uint64_t rng_seed) {
  const MeshKind ff = MeshKind::fine(config.dim);
  check_kind(r, ff, config, "optimal_scaling residual");
  check_kind(e_tilde, ff, config, "optimal_scaling correction");
  if (A_ff.rows() != static_cast<std::int64_t>(r.values.size()) || A_ff.rows() != A_ff.cols())
    throw DimensionMismatch("optimal_scaling: operator size mismatch");

  double num = 0.0, den = 0.0;
  if (subsample <= 0.0) {
    const std::vector<double> w = A_ff.multiply(e_tilde.values);
    for (std::size_t i = 0; i < w.size(); ++i) {
      num += r.values[i] * w[i];
      den += w[i] * w[i];
    }
  } else {
    // The residual and A e vanish on hole rows, so skeleton rows carry all
    // the information; sample among them.
    std::vector<std::int64_t> rows = skeleton_row_list(config);
    const auto total = static_cast<std::int64_t>(rows.size());
    std::int64_t m = std::llround(subsample * static_cast<double>(total));
    m = std::clamp<std::int64_t>(m, 1, total);
    std::mt19937_64 eng(rng_seed);
    for (std::int64_t i = 0; i < m; ++i) {
      const std::int64_t j = i + static_cast<std::int64_t>(eng() % static_cast<std::uint64_t>(total - i));
      std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
    }
    rows.resize(static_cast<std::size_t>(m));
    std::sort(rows.begin(), rows.end());
    for (const std::int64_t p : rows) {
      const double w = A_ff.row_dot(p, e_tilde.values);
      num += r.values[static_cast<std::size_t>(p)] * w;
      den += w * w;
    }
  }
  if (!(den > 0.0)) return 0.0;
  return std::max(0.0, num / den);
}

SolverContext::SolverContext(const MeshConfig& config, const ProblemSpec& problem)
    : config_(config),
      problem_(problem),
      fine_kind_(MeshKind::fine(config.dim)),
      A_fine_(assemble_operator(config, fine_kind_, problem)),
      b_fine_(assemble_rhs(config, fine_kind_, problem)),
      coarse_op_(assemble_operator(config, MeshKind::coarse(config.dim), problem)),
      holes_(config, A_fine_, hole_blocks(config)) {
  coarse_factor_.emplace(coarse_op_);
  for (int a = 0; a < config_.dim; ++a) {
    slab_kinds_.push_back(MeshKind::coarse_along(config_.dim, a));
    slab_ops_.push_back(assemble_operator(config_, slab_kinds_.back(), problem_));
    slab_factors_.emplace_back(slab_ops_.back());
    fine_to_slab_.push_back(build_projector(config_, fine_kind_, slab_kinds_.back()));
  }
  skeleton_rows_ = skeleton_row_list(config_);
}

RhsBundle SolverContext::assembled_bundle() const {
  RhsBundle b;
  b.fine = b_fine_;
  for (int a = 0; a < config_.dim; ++a)
    b.aniso.push_back(assemble_rhs(config_, slab_kinds_[static_cast<std::size_t>(a)], problem_));
  b.coarse = assemble_rhs(config_, MeshKind::coarse(config_.dim), problem_);
  return b;
}

GridFunction SolverContext::fill(const GridFunction& skeleton, std::span<const double> b,
                                 int workers) const {
  return fill_core(config_, A_fine_, skeleton, b, holes_, workers);
}

GridFunction SolverContext::initial_guess(const RhsBundle& bundle, std::uint64_t rng_seed,
                                          int workers) const {
  check_kind(bundle.fine, fine_kind_, config_, "initial_guess fine rhs");
  if (static_cast<int>(bundle.aniso.size()) != config_.dim)
    throw DimensionMismatch("initial_guess: one anisotropic rhs per axis required");

  std::vector<GridFunction> sol;
  sol.reserve(bundle.aniso.size());
  for (int a = 0; a < config_.dim; ++a) {
    check_kind(bundle.aniso[static_cast<std::size_t>(a)], slab_kinds_[static_cast<std::size_t>(a)], config_,
               "initial_guess anisotropic rhs");
    sol.push_back(slab_factors_[static_cast<std::size_t>(a)].solve(bundle.aniso[static_cast<std::size_t>(a)]));
  }

  std::optional<GridFunction> coarse;
  if (bundle.coarse) {
    check_kind(*bundle.coarse, MeshKind::coarse(config_.dim), config_, "initial_guess coarse rhs");
    coarse = coarse_factor_->solve(*bundle.coarse);
  } else {
    for (auto& g : sol) normalize_or_throw(g, "initial_guess");
  }

  GridFunction skeleton = [&] {
    if (config_.dim == 2) {
      SkeletonInputs in{std::move(sol[1]), std::move(sol[0]), std::move(coarse), !bundle.coarse.has_value()};
      return build_skeleton(in, config_, rng_seed);
    }
    return merge_3d(sol[0], sol[1], sol[2], coarse, config_, rng_seed);
  }();
  return fill(skeleton, bundle.fine.values, workers);
}

GridFunction SolverContext::error_guess(const GridFunction& r_fine, std::uint64_t rng_seed,
                                        int workers) const {
  check_kind(r_fine, fine_kind_, config_, "error_guess residual");
  RhsBundle bundle;
  bundle.fine = GridFunction(fine_kind_, config_.point_count(fine_kind_));
  for (int a = 0; a < config_.dim; ++a)
    bundle.aniso.push_back(fine_to_slab_[static_cast<std::size_t>(a)].apply(r_fine));
  return initial_guess(bundle, rng_seed, workers);
}

GridFunction initial_guess(const ProblemSpec& problem, const MeshConfig& config,
                           const RhsBundle& bundle, std::uint64_t rng_seed, int workers) {
  return SolverContext(config, problem).initial_guess(bundle, rng_seed, workers);
}

IterationState asdsm_iterate(const ProblemSpec& problem, const MeshConfig& config,
                             const IterateOptions& options) {
  const SolverContext ctx(config, problem);
  const SparseMatrix& A = ctx.fine_operator();
  const GridFunction& b = ctx.fine_rhs();
  const double b_l2 = norm_l2(b);
  const double stop_at = options.tol * (b_l2 > 0.0 ? b_l2 : 1.0);

  std::vector<double> exact_vals;
  if (problem.exact) {
    const MeshKind ff = MeshKind::fine(config.dim);
    const std::int64_t n = config.point_count(ff);
    exact_vals.resize(static_cast<std::size_t>(n));
    for (std::int64_t lin = 0; lin < n; ++lin) {
      const auto idx = config.multi_index(ff, lin);
      exact_vals[static_cast<std::size_t>(lin)] =
          problem.exact(config.coordinate(ff, std::span<const int>(idx.data(), static_cast<std::size_t>(config.dim))));
    }
  }

  IterationState st;
  auto t_prev = std::chrono::steady_clock::now();
  const auto record = [&](int k, double s_hat) {
    const auto now = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.k = k;
    rec.res_l2 = norm_l2(st.r);
    rec.res_inf = norm_inf(st.r);
    if (!exact_vals.empty()) {
      double emax = 0.0, esum = 0.0;
      for (std::size_t i = 0; i < exact_vals.size(); ++i) {
        const double d = st.u.values[i] - exact_vals[i];
        emax = std::max(emax, std::abs(d));
        esum += d * d;
      }
      double cell = 1.0;
      for (int a = 0; a < config.dim; ++a) cell *= config.fine_steps[static_cast<std::size_t>(a)];
      rec.err_max = emax;
      rec.err_l2 = std::sqrt(esum * cell);
    } else {
      rec.err_max = kNaN;
      rec.err_l2 = kNaN;
    }
    rec.s_hat = s_hat;
    rec.wall_ms = std::chrono::duration<double, std::milli>(now - t_prev).count();
    t_prev = now;
    st.history.push_back(rec);
    if (options.observer) options.observer(st);
  };

  st.u = ctx.initial_guess(ctx.assembled_bundle(), mix_seed(options.rng_seed, 0), options.workers);
  st.r = residual(A, b, st.u);
  record(0, kNaN);

  if (st.history.back().res_l2 <= stop_at) st.stop_reason = "tol";

  for (int k = 1; k <= options.max_iter && st.stop_reason.empty(); ++k) {
    const std::uint64_t seed_k = mix_seed(options.rng_seed, static_cast<std::uint64_t>(k));
    const double r_norm = st.history.back().res_l2;

    double s = 0.0;
    GridFunction e;
    bool have_e = true;
    try {
      e = ctx.error_guess(st.r, seed_k, options.workers);
    } catch (const ZeroNormSolution&) {
      have_e = false;
    }

    GridFunction u_next = st.u, r_next = st.r;
    const auto apply_step = [&](double step) {
      u_next = st.u;
      for (std::size_t i = 0; i < u_next.values.size(); ++i) u_next.values[i] += step * e.values[i];
      if (options.sparse_residual) {
        r_next = GridFunction(st.r.kind, static_cast<std::int64_t>(st.r.values.size()));
        for (const std::int64_t p : ctx.skeleton_rows())
          r_next.values[static_cast<std::size_t>(p)] =
              b.values[static_cast<std::size_t>(p)] - A.row_dot(p, u_next.values);
      } else {
        r_next = residual(A, b, u_next);
      }
    };

    if (have_e) {
      s = optimal_scaling(config, st.r, A, e, options.subsample, seed_k);
      if (s != 0.0) {
        apply_step(s);
        if (norm_l2(r_next) > r_norm * (1.0 + 1e-12) && options.subsample > 0.0) {
          s = optimal_scaling(config, st.r, A, e, 0.0, seed_k);
          if (s != 0.0) apply_step(s);
        }
        if (norm_l2(r_next) > r_norm * (1.0 + 1e-12)) s = 0.0;
      }
    }
    if (s == 0.0) {
      u_next = st.u;
      r_next = st.r;
    }

    st.u = std::move(u_next);
    st.r = std::move(r_next);
    record(k, s);

    if (st.history.back().res_l2 <= stop_at) {
      st.stop_reason = "tol";
    } else if (options.stagnation_window > 0 && k >= options.stagnation_window) {
      const double now_res = st.history.back().res_l2;
      const double then_res =
          st.history[static_cast<std::size_t>(k - options.stagnation_window)].res_l2;
      if (now_res > then_res * std::pow(options.stagnation_ratio, options.stagnation_window))
        st.stop_reason = "stagnation";
    }
  }
  if (st.stop_reason.empty()) st.stop_reason = "max_iter";
  return st;
}

}  // namespace asdsm
