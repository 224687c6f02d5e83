#include "asdsm/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "asdsm/linsolve.hpp"

namespace asdsm::checks {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string config_tag(const MeshConfig& c) {
  std::string s = "fine=(";
  for (int a = 0; a < c.dim; ++a)
    s += (a ? "," : "") + std::to_string(c.fine_counts[static_cast<std::size_t>(a)]);
  s += "), coarse=(";
  for (int a = 0; a < c.dim; ++a)
    s += (a ? "," : "") + std::to_string(c.coarse_counts[static_cast<std::size_t>(a)]);
  return s + ")";
}

bool gather_scatter_identity(const MeshConfig& config, const MeshKind& from, const MeshKind& to) {
  const Projector p = build_projector(config, from, to);
  // Injectivity: no source point feeds two target points.
  std::vector<std::int64_t> seen(p.index_map().begin(), p.index_map().end());
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) return false;

  std::vector<double> w(static_cast<std::size_t>(p.target_size()));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<double>(i + 1);
  std::vector<double> full(static_cast<std::size_t>(p.source_size()));
  p.apply_transpose(w, full);
  std::vector<double> back(w.size());
  p.apply(full, back);
  return back == w;
}

GridFunction direct_solve(const MeshConfig& config, const MeshKind& kind, const ProblemSpec& problem) {
  return Factorization(assemble_operator(config, kind, problem))
      .solve(assemble_rhs(config, kind, problem));
}

double max_error_at(const MeshConfig& config, const ProblemSpec& problem, const GridFunction& g) {
  double m = 0.0;
  const std::int64_t n = config.point_count(g.kind);
  for (std::int64_t lin = 0; lin < n; ++lin) {
    const auto idx = config.multi_index(g.kind, lin);
    const Coord x =
        config.coordinate(g.kind, std::span<const int>(idx.data(), static_cast<std::size_t>(config.dim)));
    m = std::max(m, std::abs(g.values[static_cast<std::size_t>(lin)] - problem.exact(x)));
  }
  return m;
}

}  // namespace

CheckResult projector_identities(const MeshConfig& config) {
  CheckResult res{"projector_identities " + config_tag(config), true, ""};
  const int dim = config.dim;
  const MeshKind fine = MeshKind::fine(dim);
  int checked = 0;

  std::vector<std::pair<MeshKind, MeshKind>> pairs;
  for (unsigned m = 1; m < (1u << dim); ++m) pairs.emplace_back(fine, MeshKind::from_mask(dim, m));
  pairs.emplace_back(fine, MeshKind::holes(dim));
  for (unsigned from = 1; from < (1u << dim); ++from)
    for (unsigned to = 1; to < (1u << dim); ++to)
      if (from != to && (from & to) == from)
        pairs.emplace_back(MeshKind::from_mask(dim, from), MeshKind::from_mask(dim, to));

  for (const auto& [from, to] : pairs) {
    ++checked;
    if (!gather_scatter_identity(config, from, to)) {
      res.pass = false;
      res.detail = "identity failed for " + from.name() + " -> " + to.name();
      return res;
    }
  }
  res.detail = std::to_string(checked) + " projector pairs exact";
  return res;
}

CheckResult partition_counts(const MeshConfig& config) {
  CheckResult res{"partition_counts " + config_tag(config), true, ""};
  const int dim = config.dim;
  const MeshKind fine = MeshKind::fine(dim);
  const std::int64_t total = config.point_count(fine);

  std::vector<std::int64_t> counts(1u << dim, 0);
  std::vector<std::int64_t> hole_points;
  for (std::int64_t lin = 0; lin < total; ++lin) {
    const auto idx = config.multi_index(fine, lin);
    const PointClass pc =
        classify(config, std::span<const int>(idx.data(), static_cast<std::size_t>(dim)));
    ++counts[pc.coarse_mask];
    if (pc.is_hole()) hole_points.push_back(lin);
  }

  std::int64_t sum = 0;
  for (unsigned m = 0; m < (1u << dim); ++m) {
    std::int64_t expect = 1;
    for (int a = 0; a < dim; ++a) {
      const std::int64_t nf = config.fine_counts[static_cast<std::size_t>(a)];
      const std::int64_t nc = config.coarse_counts[static_cast<std::size_t>(a)];
      expect *= ((m >> a) & 1u) ? nc : nf - nc;
    }
    if (counts[m] != expect) {
      res.pass = false;
      res.detail = "mask " + std::to_string(m) + " count " + std::to_string(counts[m]) + " != " +
                   std::to_string(expect);
      return res;
    }
    sum += counts[m];
  }
  if (sum != total) {
    res.pass = false;
    res.detail = "classes do not sum to the fine count";
    return res;
  }

  // Hole blocks tile the hole set.
  std::vector<std::int64_t> tiled;
  for (const auto& b : hole_blocks(config)) tiled.insert(tiled.end(), b.positions.begin(), b.positions.end());
  std::vector<std::int64_t> sorted = tiled;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || sorted != hole_points) {
    res.pass = false;
    res.detail = "hole blocks do not tile the classified hole set";
    return res;
  }
  res.detail = std::to_string(total) + " points partitioned, " + std::to_string(hole_points.size()) +
               " in holes";
  return res;
}

CheckResult block_fidelity(const MeshConfig& config, const ProblemSpec& problem) {
  CheckResult res{"block_fidelity " + config_tag(config), true, ""};
  const SparseMatrix A = assemble_operator(config, MeshKind::fine(config.dim), problem);
  const auto blocks = hole_blocks(config);
  for (const auto& b : blocks) {
    const SparseMatrix extracted = A.extract_block(b.positions);
    const SparseMatrix standalone = assemble_hole_operator(config, problem, b);
    if (!(extracted == standalone)) {
      res.pass = false;
      res.detail = "block mismatch at hole index (" + std::to_string(b.hole[0]) + "," +
                   std::to_string(b.hole[1]) + ")";
      return res;
    }
  }
  res.detail = std::to_string(blocks.size()) + " blocks entrywise exact";
  return res;
}

CheckResult planted_skeleton(const MeshConfig& config, const ProblemSpec& problem, double rel_tol) {
  CheckResult res{"planted_skeleton " + config_tag(config), false, ""};
  const MeshKind fine = MeshKind::fine(config.dim);
  const SparseMatrix A = assemble_operator(config, fine, problem);
  const GridFunction b = assemble_rhs(config, fine, problem);
  const GridFunction oracle = Factorization(A).solve(b);

  GridFunction skeleton = oracle;
  for (const auto& blk : hole_blocks(config))
    for (const std::int64_t p : blk.positions) skeleton.values[static_cast<std::size_t>(p)] = 0.0;

  const GridFunction filled = fill_holes(skeleton, A, b, config);
  double diff = 0.0;
  for (std::size_t i = 0; i < filled.values.size(); ++i)
    diff = std::max(diff, std::abs(filled.values[i] - oracle.values[i]));
  const double rel = diff / std::max(1e-300, norm_inf(oracle));
  res.pass = rel <= rel_tol;
  res.detail = "relative max deviation " + fmt(rel) + " (budget " + fmt(rel_tol) + ")";
  return res;
}

CheckResult run_invariants(const MeshConfig& config, const ProblemSpec& problem, int iters,
                           std::uint64_t seed, IterationState* out) {
  CheckResult res{"run_invariants " + config_tag(config), false, ""};
  const GridFunction b = assemble_rhs(config, MeshKind::fine(config.dim), problem);
  const double hole_budget = 1e-10 * std::max(1.0, norm_inf(b));

  std::vector<std::int64_t> hole_pos;
  for (const auto& blk : hole_blocks(config))
    hole_pos.insert(hole_pos.end(), blk.positions.begin(), blk.positions.end());

  double worst_hole = 0.0, worst_factor = 0.0, prev = -1.0;
  IterateOptions opts;
  opts.max_iter = iters;
  opts.tol = 0.0;
  opts.stagnation_window = 0;
  opts.rng_seed = seed;
  opts.observer = [&](const IterationState& st) {
    for (const std::int64_t p : hole_pos)
      worst_hole = std::max(worst_hole, std::abs(st.r.values[static_cast<std::size_t>(p)]));
    const double cur = st.history.back().res_l2;
    if (prev >= 0.0 && prev > 0.0) worst_factor = std::max(worst_factor, cur / prev);
    prev = cur;
  };
  IterationState st = asdsm_iterate(problem, config, opts);
  if (out) *out = std::move(st);

  const bool nullity = worst_hole <= hole_budget;
  const bool noninc = worst_factor <= 1.0 + 1e-12;
  res.pass = nullity && noninc;
  res.detail = "worst hole residual " + fmt(worst_hole) + " (budget " + fmt(hole_budget) +
               "), worst step factor " + (worst_factor > 0 ? fmt(worst_factor) : std::string("n/a"));
  return res;
}

CheckResult residual_at_cross(const MeshConfig& config, const ProblemSpec& problem, int iters,
                              std::uint64_t seed) {
  CheckResult res{"residual_at_cross " + config_tag(config), false, ""};
  IterateOptions opts;
  opts.max_iter = iters;
  opts.tol = 0.0;
  opts.stagnation_window = 0;
  opts.rng_seed = seed;
  const IterationState st = asdsm_iterate(problem, config, opts);

  const MeshKind fine = MeshKind::fine(config.dim);
  std::int64_t argmax = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < st.r.values.size(); ++i)
    if (std::abs(st.r.values[i]) > best) {
      best = std::abs(st.r.values[i]);
      argmax = static_cast<std::int64_t>(i);
    }
  const auto idx = config.multi_index(fine, argmax);

  int dist = 0;
  for (int a = 0; a < config.dim; ++a) {
    const int n = config.factors[static_cast<std::size_t>(a)];
    const int nc = config.coarse_counts[static_cast<std::size_t>(a)];
    const int i = idx[static_cast<std::size_t>(a)];
    int nearest = static_cast<int>(std::lround(static_cast<double>(i) / n)) * n;
    nearest = std::clamp(nearest, 0, (nc + 1) * n);
    dist = std::max(dist, std::abs(i - nearest));
  }
  res.pass = dist <= 1;
  res.detail = "max |r| = " + fmt(best) + " at distance " + std::to_string(dist) +
               " fine steps from the nearest cross point";
  return res;
}

CheckResult residual_cross_jump(const MeshConfig& config, const ProblemSpec& problem, int iters,
                                double min_jump, std::uint64_t seed) {
  CheckResult res{"residual_cross_jump " + config_tag(config), false, ""};
  IterateOptions opts;
  opts.max_iter = iters;
  opts.tol = 0.0;
  opts.stagnation_window = 0;
  opts.rng_seed = seed;
  const IterationState st = asdsm_iterate(problem, config, opts);

  const MeshKind fine = MeshKind::fine(config.dim);
  const double floor = 1e-3 * norm_inf(st.r);
  const auto at = [&](std::span<const int> idx) {
    return std::abs(st.r.values[static_cast<std::size_t>(config.linear_index(fine, idx))]);
  };

  // Odometer over the interior cross lattice, one coarse cell per axis.
  std::array<int, kMaxDim> m{};
  for (int a = 0; a < config.dim; ++a) m[static_cast<std::size_t>(a)] = 1;
  double best = 0.0;
  for (;;) {
    std::array<int, kMaxDim> idx{};
    for (int a = 0; a < config.dim; ++a)
      idx[static_cast<std::size_t>(a)] =
          m[static_cast<std::size_t>(a)] * config.factors[static_cast<std::size_t>(a)];
    const std::span<const int> span(idx.data(), static_cast<std::size_t>(config.dim));
    const double rc = at(span);
    double adj = 0.0;
    for (int a = 0; a < config.dim; ++a) {
      for (const int step : {-1, 1}) {
        auto nb = idx;
        nb[static_cast<std::size_t>(a)] += step;
        if (nb[static_cast<std::size_t>(a)] < 1 ||
            nb[static_cast<std::size_t>(a)] > config.fine_counts[static_cast<std::size_t>(a)])
          continue;
        adj = std::max(adj, at(std::span<const int>(nb.data(), span.size())));
      }
    }
    if (adj >= floor) best = std::max(best, adj / std::max(rc, 1e-300));

    int a = 0;
    while (a < config.dim &&
           ++m[static_cast<std::size_t>(a)] > config.coarse_counts[static_cast<std::size_t>(a)])
      m[static_cast<std::size_t>(a++)] = 1;
    if (a == config.dim) break;
  }

  res.pass = best >= min_jump;
  res.detail = "largest neighbor-to-cross |r| ratio " + fmt(best) + " (needs >= " + fmt(min_jump) +
               ")";
  return res;
}

CheckResult discretization_order(const ProblemSpec& problem, const MeshConfig& coarse_mesh,
                                 const MeshConfig& fine_mesh, double lo, double hi) {
  CheckResult res{"discretization_order", false, ""};
  const auto e1 = error_norms(coarse_mesh, problem, oracle_solve_fine(coarse_mesh, problem)).first;
  const auto e2 = error_norms(fine_mesh, problem, oracle_solve_fine(fine_mesh, problem)).first;
  const double ratio = e1 / e2;
  res.pass = ratio >= lo && ratio <= hi;
  res.detail = "max-error ratio " + fmt(ratio) + " (expected [" + fmt(lo) + "," + fmt(hi) + "])";
  return res;
}

CheckResult richardson_improvement(const MeshConfig& config, const ProblemSpec& problem) {
  CheckResult res{"richardson_improvement " + config_tag(config), false, ""};
  const MeshKind fc = MeshKind::coarse_along(2, 1), cf = MeshKind::coarse_along(2, 0),
                 cc = MeshKind::coarse(2);
  const GridFunction u1 = build_projector(config, fc, cc).apply(direct_solve(config, fc, problem));
  const GridFunction u2 = build_projector(config, cf, cc).apply(direct_solve(config, cf, problem));
  const GridFunction ucc = direct_solve(config, cc, problem);
  const GridFunction uhat = richardson_extrapolate(u1, u2, ucc);

  const double e1 = max_error_at(config, problem, u1);
  const double e2 = max_error_at(config, problem, u2);
  const double ec = max_error_at(config, problem, ucc);
  const double eh = max_error_at(config, problem, uhat);
  res.pass = eh <= e1 && eh <= e2 && eh <= ec;
  res.detail = "extrapolated " + fmt(eh) + " vs inputs " + fmt(e1) + ", " + fmt(e2) + ", " + fmt(ec);
  return res;
}

CheckResult scaling_closed_form(int nsystems, std::uint64_t seed) {
  CheckResult res{"scaling_closed_form", true, ""};
  const std::array<int, 2> nf{5, 5}, nc{2, 2};
  const MeshConfig config = MeshConfig::create(2, nf, nc);
  const MeshKind fine = MeshKind::fine(2);
  const std::int64_t n = config.point_count(fine);  // 25 unknowns

  double worst = 0.0;
  for (int sys = 0; sys < nsystems; ++sys) {
    std::mt19937_64 eng(mix_seed(seed, static_cast<std::uint64_t>(sys)));
    const auto u01 = [&] { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
    SparseBuilder builder(n, n);
    for (std::int64_t r = 0; r < n; ++r) {
      for (std::int64_t c = 0; c < n; ++c) builder.add(c, 2.0 * u01() - 1.0);
      builder.next_row();
    }
    const SparseMatrix A = builder.finish();
    GridFunction r(fine, n), e(fine, n);
    for (auto& v : r.values) v = 2.0 * u01() - 1.0;
    for (auto& v : e.values) v = 2.0 * u01() - 1.0;

    const double s_hat = optimal_scaling(config, r, A, e, 0.0, 0);

    const std::vector<double> w = A.multiply(e.values);
    double best_s = 0.0, best_f = -1.0;
    for (int step = 0; step <= 3000; ++step) {
      const double s = step * 1e-3;
      double f = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double d = r.values[i] - s * w[i];
        f += d * d;
      }
      if (best_f < 0.0 || f < best_f) {
        best_f = f;
        best_s = s;
      }
    }
    worst = std::max(worst, std::abs(s_hat - best_s));
  }
  res.pass = worst <= 1e-3;
  res.detail = "worst |closed-form - scan| = " + fmt(worst) + " over " + std::to_string(nsystems) +
               " systems";
  return res;
}

CheckResult hole_faces_complete(const MeshConfig& config, const ProblemSpec& problem,
                                std::uint64_t seed) {
  CheckResult res{"hole_faces_complete " + config_tag(config), false, ""};
  const GridFunction u_x = direct_solve(config, MeshKind::coarse_along(3, 0), problem);
  const GridFunction u_y = direct_solve(config, MeshKind::coarse_along(3, 1), problem);
  const GridFunction u_z = direct_solve(config, MeshKind::coarse_along(3, 2), problem);
  const std::optional<GridFunction> u_ccc = direct_solve(config, MeshKind::coarse(3), problem);
  const GridFunction skel = merge_3d(u_x, u_y, u_z, u_ccc, config, seed);

  const MeshKind fine = MeshKind::fine(3);
  for (const double v : skel.values)
    if (!std::isfinite(v)) {
      res.detail = "merged skeleton carries a non-finite value";
      return res;
    }

  for (const auto& blk : hole_blocks(config)) {
    for (const std::int64_t p : blk.positions) {
      if (skel.values[static_cast<std::size_t>(p)] != 0.0) {
        res.detail = "merged skeleton is nonzero inside a hole";
        return res;
      }
      const auto idx = config.multi_index(fine, p);
      for (int a = 0; a < 3; ++a) {
        for (const int d : {-1, +1}) {
          auto nb = idx;
          nb[static_cast<std::size_t>(a)] += d;
          const int i = nb[static_cast<std::size_t>(a)];
          if (i < 1 || i > config.fine_counts[static_cast<std::size_t>(a)]) continue;  // domain boundary
          const PointClass pc =
              classify(config, std::span<const int>(nb.data(), static_cast<std::size_t>(3)));
          if (pc.is_hole() && pc.hole != blk.hole) {
            res.detail = "two holes touch without a skeleton plane between them";
            return res;
          }
        }
      }
    }
  }
  res.pass = true;
  res.detail = "all hole faces are backed by boundary or skeleton data";
  return res;
}

CheckResult initial_residual_gap(const MeshConfig& config, const ProblemSpec& small_problem,
                                 const ProblemSpec& large_problem, double factor,
                                 std::uint64_t seed) {
  CheckResult res{"initial_residual_gap " + config_tag(config), false, ""};
  const auto r0 = [&](const ProblemSpec& p) {
    const SolverContext ctx(config, p);
    const GridFunction u = ctx.initial_guess(ctx.assembled_bundle(), mix_seed(seed, 0));
    return norm_l2(residual(ctx.fine_operator(), ctx.fine_rhs(), u));
  };
  const double ra = r0(small_problem);
  const double rb = r0(large_problem);
  res.pass = ra * factor <= rb;
  res.detail = "r0 = " + fmt(ra) + " vs " + fmt(rb) + " (required factor " + fmt(factor) + ")";
  return res;
}

}  // namespace asdsm::checks
