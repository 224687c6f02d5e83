#include "asdsm/problems.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace asdsm {

namespace {

constexpr double kPi = std::numbers::pi;

ProblemSpec plane_wave_2d() {
  ProblemSpec p;
  p.dim = 2;
  p.alpha[0] = p.alpha[1] = [](const Coord&) { return 1.0; };
  p.beta[0] = p.beta[1] = [](const Coord&) { return 1.0; };
  p.exact = [](const Coord& x) { return std::sin(kPi * x[0] + kPi * x[1]); };
  p.source = [](const Coord& x) {
    const double th = kPi * x[0] + kPi * x[1];
    return 2.0 * kPi * kPi * std::sin(th) + 2.0 * kPi * std::cos(th);
  };
  p.boundary = p.exact;
  return p;
}

ProblemSpec variable_2d() {
  ProblemSpec p;
  p.dim = 2;
  p.alpha[0] = [](const Coord& x) { return 1.0 + x[0] * x[0]; };
  p.alpha[1] = [](const Coord& x) { return 2.0 + x[0] * x[1]; };
  p.beta[0] = [](const Coord& x) { return 2.0 - x[0]; };
  p.beta[1] = [](const Coord& x) { return 1.0 + x[1]; };
  p.exact = [](const Coord& x) { return std::sin(4.0 * kPi * x[0] + 4.0 * kPi * x[1]); };
  p.source = [](const Coord& x) {
    const double th = 4.0 * kPi * (x[0] + x[1]);
    const double a = 3.0 + x[0] * x[0] + x[0] * x[1];
    const double b = 3.0 - x[0] + x[1];
    return 16.0 * kPi * kPi * a * std::sin(th) + 4.0 * kPi * b * std::cos(th);
  };
  p.boundary = p.exact;
  return p;
}

ProblemSpec plane_wave_1d_time() {
  ProblemSpec p;
  p.dim = 2;
  p.time_dependent = true;
  p.alpha[0] = [](const Coord&) { return 1.0; };
  p.beta[0] = [](const Coord&) { return 1.0; };
  p.exact = [](const Coord& x) { return std::sin(kPi * x[0] + kPi * x[1]); };
  p.source = [](const Coord& x) {
    const double th = kPi * (x[0] + x[1]);
    return kPi * kPi * std::sin(th) + 2.0 * kPi * std::cos(th);
  };
  p.boundary = p.exact;
  return p;
}

ProblemSpec variable_1d_time() {
  ProblemSpec p;
  p.dim = 2;
  p.time_dependent = true;
  p.alpha[0] = [](const Coord& x) { return 1.0 + x[0] * x[0]; };
  p.beta[0] = [](const Coord& x) { return 2.0 - x[0]; };
  p.exact = [](const Coord& x) { return std::sin(4.0 * kPi * x[0] + 4.0 * kPi * x[1]); };
  p.source = [](const Coord& x) {
    const double th = 4.0 * kPi * (x[0] + x[1]);
    return 16.0 * kPi * kPi * (1.0 + x[0] * x[0]) * std::sin(th) +
           4.0 * kPi * (3.0 - x[0]) * std::cos(th);
  };
  p.boundary = p.exact;
  return p;
}

ProblemSpec plane_wave_3d() {
  ProblemSpec p;
  p.dim = 3;
  p.alpha[0] = p.alpha[1] = p.alpha[2] = [](const Coord&) { return 1.0; };
  p.beta[0] = p.beta[1] = p.beta[2] = [](const Coord&) { return 1.0; };
  p.exact = [](const Coord& x) { return std::sin(kPi * (x[0] + x[1] + x[2])); };
  p.source = [](const Coord& x) {
    const double th = kPi * (x[0] + x[1] + x[2]);
    return 3.0 * kPi * kPi * std::sin(th) + 3.0 * kPi * std::cos(th);
  };
  p.boundary = p.exact;
  return p;
}

ProblemSpec variable_3d() {
  ProblemSpec p;
  p.dim = 3;
  p.alpha[0] = [](const Coord& x) { return 1.0 + x[0] * x[0]; };
  p.alpha[1] = [](const Coord& x) { return 2.0 + x[0] * x[1]; };
  p.alpha[2] = [](const Coord& x) { return 3.0 - x[0] * x[1] * x[2]; };
  p.beta[0] = [](const Coord& x) { return 2.0 - x[0]; };
  p.beta[1] = [](const Coord& x) { return 1.0 + x[1]; };
  p.beta[2] = [](const Coord& x) { return 2.0 - x[0] + x[1] * x[2]; };
  p.exact = [](const Coord& x) { return std::sin(4.0 * kPi * (x[0] + x[1] + x[2])); };
  p.source = [](const Coord& x) {
    const double th = 4.0 * kPi * (x[0] + x[1] + x[2]);
    const double a = 6.0 + x[0] * x[0] + x[0] * x[1] - x[0] * x[1] * x[2];
    const double b = 5.0 - 2.0 * x[0] + x[1] + x[1] * x[2];
    return 16.0 * kPi * kPi * a * std::sin(th) + 4.0 * kPi * b * std::cos(th);
  };
  p.boundary = p.exact;
  return p;
}

}  // namespace

ProblemSpec make_problem(int example, int setting) {
  if (setting != 1 && setting != 2)
    throw UnknownExample("setting must be 1 or 2, got " + std::to_string(setting));
  switch (example) {
    case 1:
      return setting == 1 ? plane_wave_2d() : variable_2d();
    case 2:
      return setting == 1 ? plane_wave_2d() : plane_wave_1d_time();
    case 3:
      return setting == 1 ? plane_wave_1d_time() : variable_1d_time();
    case 4:
      return setting == 1 ? plane_wave_3d() : variable_3d();
    default:
      throw UnknownExample("example must be 1..4, got " + std::to_string(example));
  }
}

MeshConfig example_mesh(int example, int setting, int nf, int nc) {
  const ProblemSpec p = make_problem(example, setting);
  std::array<int, kMaxDim> fine{};
  std::array<int, kMaxDim> coarse{};
  for (int a = 0; a < p.dim; ++a) {
    fine[static_cast<std::size_t>(a)] = nf;
    coarse[static_cast<std::size_t>(a)] = nc;
  }
  return MeshConfig::create(p.dim, std::span<const int>(fine.data(), static_cast<std::size_t>(p.dim)),
                            std::span<const int>(coarse.data(), static_cast<std::size_t>(p.dim)),
                            p.time_dependent ? p.dim - 1 : -1);
}

std::pair<double, double> error_norms(const MeshConfig& config, const ProblemSpec& problem,
                                      const GridFunction& u) {
  if (!problem.exact) throw NoExactSolution("problem has no exact solution attached");
  if (u.kind.is_holes()) throw InvalidKind("error norms are defined on the tensor meshes");
  const std::int64_t n = config.point_count(u.kind);
  if (static_cast<std::int64_t>(u.values.size()) != n)
    throw DimensionMismatch("error_norms: value count does not match the mesh");

  double cell = 1.0;
  for (int a = 0; a < config.dim; ++a)
    cell *= u.kind.coarse_on(a) ? config.coarse_steps[static_cast<std::size_t>(a)]
                                : config.fine_steps[static_cast<std::size_t>(a)];

  double emax = 0.0, esum = 0.0;
  for (std::int64_t lin = 0; lin < n; ++lin) {
    const auto idx = config.multi_index(u.kind, lin);
    const Coord x = config.coordinate(u.kind, std::span<const int>(idx.data(), static_cast<std::size_t>(config.dim)));
    const double d = u.values[static_cast<std::size_t>(lin)] - problem.exact(x);
    emax = std::max(emax, std::abs(d));
    esum += d * d;
  }
  return {emax, std::sqrt(esum * cell)};
}

}  // namespace asdsm
