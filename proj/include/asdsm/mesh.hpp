#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "asdsm/errors.hpp"

namespace asdsm {

inline constexpr int kMaxDim = 3;

// Point coordinates; axes beyond the mesh dimension are zero.
using Coord = std::array<double, kMaxDim>;

// One of the uniform tensor meshes over the unit box (per-axis choice of the
// fine or the coarse step), or the holes set of the fine mesh. The dense
// anisotropic meshes are the kinds with exactly one coarse axis; the skeleton
// is their union.
class MeshKind {
 public:
  static MeshKind fine(int dim) { return MeshKind(dim, 0u, false); }
  static MeshKind coarse(int dim) { return MeshKind(dim, full_mask(dim), false); }
  static MeshKind holes(int dim) { return MeshKind(dim, 0u, true); }
  // Coarse along `axis`, fine along every other axis.
  static MeshKind coarse_along(int dim, int axis);
  static MeshKind from_mask(int dim, unsigned coarse_mask);

  int dim() const { return dim_; }
  bool is_holes() const { return holes_; }
  unsigned coarse_mask() const { return holes_ ? 0u : mask_; }
  bool coarse_on(int axis) const { return !holes_ && ((mask_ >> axis) & 1u); }
  bool is_fine() const { return !holes_ && mask_ == 0u; }
  bool is_coarse() const { return !holes_ && mask_ == full_mask(dim_); }
  // Exactly one coarse axis (a dense anisotropic mesh); returns it, or -1.
  int single_coarse_axis() const;

  friend bool operator==(const MeshKind&, const MeshKind&) = default;

  // Human-readable tag, e.g. "[h,H]", "[H,H,H]", "[holes]".
  std::string name() const;

 private:
  static constexpr unsigned full_mask(int dim) { return (1u << dim) - 1u; }
  MeshKind(int dim, unsigned mask, bool holes) : dim_(dim), mask_(mask), holes_(holes) {}

  int dim_;
  unsigned mask_;
  bool holes_;
};

// Geometry of a fine/coarse mesh pair on the unit box. Interior point counts
// exclude the boundary; fine_counts[a] + 1 = factors[a] * (coarse_counts[a] + 1).
struct MeshConfig {
  int dim = 0;
  std::array<int, kMaxDim> fine_counts{};
  std::array<int, kMaxDim> coarse_counts{};
  std::array<int, kMaxDim> factors{};
  std::array<double, kMaxDim> fine_steps{};
  std::array<double, kMaxDim> coarse_steps{};
  int time_axis = -1;  // last axis, or -1 for steady problems

  // Throws DivisibilityError / DegenerateError / IndexOutOfRange.
  static MeshConfig create(int dim, std::span<const int> fine_counts,
                           std::span<const int> coarse_counts, int time_axis = -1);

  // Interior points along `axis` for a tensor mesh kind.
  int axis_points(const MeshKind& kind, int axis) const;
  std::int64_t point_count(const MeshKind& kind) const;

  // Linearization is axis-0-fastest over 1-based per-axis interior indices.
  // For the holes kind the linear index runs block by block (see hole_blocks).
  std::int64_t linear_index(const MeshKind& kind, std::span<const int> idx) const;
  std::array<int, kMaxDim> multi_index(const MeshKind& kind, std::int64_t lin) const;

  // Every coordinate is global_fine_index * fine_step, so nodes shared between
  // meshes get bitwise-identical coordinates.
  Coord coordinate(const MeshKind& kind, std::span<const int> idx) const;
  double axis_coordinate(int axis, std::int64_t global_fine_index) const {
    return static_cast<double>(global_fine_index) * fine_steps[static_cast<std::size_t>(axis)];
  }
};

// Classification of a fine-mesh point: which coarse lines it lies on.
// coarse_mask == full -> cross point; one bit -> skeleton point dense along
// the unset axes; 0 -> interior of a hole.
struct PointClass {
  unsigned coarse_mask = 0;
  std::array<int, kMaxDim> hole{};  // hole multi-index, valid iff coarse_mask == 0

  bool is_cross(int dim) const { return coarse_mask == (1u << dim) - 1u; }
  bool is_hole() const { return coarse_mask == 0; }
  bool is_skeleton() const { return coarse_mask != 0; }
};

PointClass classify(const MeshConfig& config, std::span<const int> fine_index);

// Values attached to the points of one mesh kind, in linear-index order.
struct GridFunction {
  MeshKind kind;
  std::vector<double> values;

  GridFunction() : kind(MeshKind::fine(2)) {}
  GridFunction(MeshKind k, std::vector<double> v) : kind(k), values(std::move(v)) {}
  GridFunction(MeshKind k, std::int64_t n) : kind(k), values(static_cast<std::size_t>(n), 0.0) {}
};

double norm_inf(std::span<const double> v);
double norm_l2(std::span<const double> v);
inline double norm_inf(const GridFunction& g) { return norm_inf(std::span<const double>(g.values)); }
inline double norm_l2(const GridFunction& g) { return norm_l2(std::span<const double>(g.values)); }

// Index-map projector between nested meshes: apply gathers source values at
// the target's points, apply_transpose scatters them back (zeros elsewhere).
// Rows are unit vectors, so apply(apply_transpose(v)) == v exactly.
class Projector {
 public:
  Projector(MeshKind from, MeshKind to, std::int64_t from_size, std::vector<std::int64_t> map);

  const MeshKind& from() const { return from_; }
  const MeshKind& to() const { return to_; }
  std::int64_t source_size() const { return from_size_; }
  std::int64_t target_size() const { return static_cast<std::int64_t>(map_.size()); }
  std::span<const std::int64_t> index_map() const { return map_; }

  void apply(std::span<const double> src, std::span<double> dst) const;
  void apply_transpose(std::span<const double> src, std::span<double> dst) const;
  // Scatter without zero-filling the untouched entries first.
  void scatter_add(std::span<const double> src, std::span<double> dst) const;

  GridFunction apply(const GridFunction& g) const;
  GridFunction apply_transpose(const GridFunction& g) const;

 private:
  MeshKind from_, to_;
  std::int64_t from_size_;
  std::vector<std::int64_t> map_;
};

// Throws NotASubmesh unless `to` refines to `from` (coarse axes of `from` are
// coarse in `to`) or `to` is the holes set of the fine mesh.
Projector build_projector(const MeshConfig& config, const MeshKind& from, const MeshKind& to);

// One hole: the open block of fine points strictly inside a coarse cell.
struct HoleBlock {
  std::array<int, kMaxDim> hole{};         // 0-based block multi-index
  std::vector<std::int64_t> positions;     // fine-mesh linear indices, ascending
};

// All holes, lexicographic in the block multi-index (axis 0 fastest). Their
// concatenated positions define the linear order of the holes kind.
std::vector<HoleBlock> hole_blocks(const MeshConfig& config);

}  // namespace asdsm
