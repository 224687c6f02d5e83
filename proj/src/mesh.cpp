#include "asdsm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace asdsm {

namespace {

void require_dim(int dim) {
  if (dim < 2 || dim > kMaxDim) throw DimensionMismatch("mesh dimension must be 2 or 3, got " + std::to_string(dim));
}

}  // namespace

MeshKind MeshKind::coarse_along(int dim, int axis) {
  require_dim(dim);
  if (axis < 0 || axis >= dim) throw IndexOutOfRange("coarse_along: axis " + std::to_string(axis));
  return MeshKind(dim, 1u << axis, false);
}

MeshKind MeshKind::from_mask(int dim, unsigned coarse_mask) {
  require_dim(dim);
  if (coarse_mask >= (1u << dim)) throw IndexOutOfRange("from_mask: mask out of range");
  return MeshKind(dim, coarse_mask, false);
}

int MeshKind::single_coarse_axis() const {
  if (holes_ || mask_ == 0 || (mask_ & (mask_ - 1)) != 0) return -1;
  int axis = 0;
  while (((mask_ >> axis) & 1u) == 0) ++axis;
  return axis;
}

std::string MeshKind::name() const {
  if (holes_) return "[holes]";
  std::string s = "[";
  for (int a = 0; a < dim_; ++a) {
    if (a) s += ',';
    s += coarse_on(a) ? 'H' : 'h';
  }
  s += ']';
  return s;
}

MeshConfig MeshConfig::create(int dim, std::span<const int> fine_counts,
                              std::span<const int> coarse_counts, int time_axis) {
  require_dim(dim);
  if (static_cast<int>(fine_counts.size()) != dim || static_cast<int>(coarse_counts.size()) != dim)
    throw DimensionMismatch("mesh counts must have one entry per axis");
  if (time_axis != -1 && time_axis != dim - 1)
    throw DimensionMismatch("time axis must be the last axis");

  MeshConfig c;
  c.dim = dim;
  c.time_axis = time_axis;
  for (int a = 0; a < dim; ++a) {
    const int nf = fine_counts[static_cast<std::size_t>(a)];
    const int nc = coarse_counts[static_cast<std::size_t>(a)];
    if (nf < 1 || nc < 1)
      throw DegenerateError("axis " + std::to_string(a) + ": interior point counts must be >= 1");
    if ((nf + 1) % (nc + 1) != 0)
      throw DivisibilityError("axis " + std::to_string(a) + ": fine intervals " + std::to_string(nf + 1) +
                              " not divisible by coarse intervals " + std::to_string(nc + 1));
    const int n = (nf + 1) / (nc + 1);
    if (n < 2)
      throw DegenerateError("axis " + std::to_string(a) + ": refinement factor 1 leaves no holes");
    c.fine_counts[static_cast<std::size_t>(a)] = nf;
    c.coarse_counts[static_cast<std::size_t>(a)] = nc;
    c.factors[static_cast<std::size_t>(a)] = n;
    c.fine_steps[static_cast<std::size_t>(a)] = 1.0 / static_cast<double>(nf + 1);
    c.coarse_steps[static_cast<std::size_t>(a)] = static_cast<double>(n) * c.fine_steps[static_cast<std::size_t>(a)];
  }
  return c;
}

int MeshConfig::axis_points(const MeshKind& kind, int axis) const {
  if (kind.is_holes()) throw InvalidKind("holes mesh has no per-axis point count");
  if (kind.dim() != dim) throw DimensionMismatch("mesh kind dimension mismatch");
  if (axis < 0 || axis >= dim) throw IndexOutOfRange("axis " + std::to_string(axis));
  return kind.coarse_on(axis) ? coarse_counts[static_cast<std::size_t>(axis)]
                              : fine_counts[static_cast<std::size_t>(axis)];
}

std::int64_t MeshConfig::point_count(const MeshKind& kind) const {
  if (kind.dim() != dim) throw DimensionMismatch("mesh kind dimension mismatch");
  std::int64_t n = 1;
  if (kind.is_holes()) {
    for (int a = 0; a < dim; ++a)
      n *= static_cast<std::int64_t>(coarse_counts[static_cast<std::size_t>(a)] + 1) *
           (factors[static_cast<std::size_t>(a)] - 1);
    return n;
  }
  for (int a = 0; a < dim; ++a) n *= axis_points(kind, a);
  return n;
}

std::int64_t MeshConfig::linear_index(const MeshKind& kind, std::span<const int> idx) const {
  if (kind.is_holes()) throw InvalidKind("holes mesh is not indexed by a tensor multi-index");
  if (static_cast<int>(idx.size()) != dim) throw DimensionMismatch("multi-index size mismatch");
  std::int64_t lin = 0, stride = 1;
  for (int a = 0; a < dim; ++a) {
    const int n = axis_points(kind, a);
    const int i = idx[static_cast<std::size_t>(a)];
    if (i < 1 || i > n)
      throw IndexOutOfRange("index " + std::to_string(i) + " outside [1," + std::to_string(n) +
                            "] on axis " + std::to_string(a));
    lin += static_cast<std::int64_t>(i - 1) * stride;
    stride *= n;
  }
  return lin;
}

std::array<int, kMaxDim> MeshConfig::multi_index(const MeshKind& kind, std::int64_t lin) const {
  if (kind.is_holes()) throw InvalidKind("holes mesh is not indexed by a tensor multi-index");
  if (lin < 0 || lin >= point_count(kind)) throw IndexOutOfRange("linear index " + std::to_string(lin));
  std::array<int, kMaxDim> idx{};
  for (int a = 0; a < dim; ++a) {
    const int n = axis_points(kind, a);
    idx[static_cast<std::size_t>(a)] = static_cast<int>(lin % n) + 1;
    lin /= n;
  }
  return idx;
}

Coord MeshConfig::coordinate(const MeshKind& kind, std::span<const int> idx) const {
  if (kind.is_holes()) throw InvalidKind("holes mesh points are addressed through hole_blocks");
  if (static_cast<int>(idx.size()) != dim) throw DimensionMismatch("multi-index size mismatch");
  Coord x{};
  for (int a = 0; a < dim; ++a) {
    const std::int64_t stride = kind.coarse_on(a) ? factors[static_cast<std::size_t>(a)] : 1;
    x[static_cast<std::size_t>(a)] = axis_coordinate(a, stride * idx[static_cast<std::size_t>(a)]);
  }
  return x;
}

PointClass classify(const MeshConfig& config, std::span<const int> fine_index) {
  if (static_cast<int>(fine_index.size()) != config.dim)
    throw DimensionMismatch("fine index size mismatch");
  PointClass pc;
  for (int a = 0; a < config.dim; ++a) {
    const int i = fine_index[static_cast<std::size_t>(a)];
    if (i < 1 || i > config.fine_counts[static_cast<std::size_t>(a)])
      throw IndexOutOfRange("fine index " + std::to_string(i) + " on axis " + std::to_string(a));
    const int n = config.factors[static_cast<std::size_t>(a)];
    if (i % n == 0)
      pc.coarse_mask |= 1u << a;
    else
      pc.hole[static_cast<std::size_t>(a)] = i / n;
  }
  if (pc.coarse_mask != 0) pc.hole = {};
  return pc;
}

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double norm_l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Projector::Projector(MeshKind from, MeshKind to, std::int64_t from_size, std::vector<std::int64_t> map)
    : from_(from), to_(to), from_size_(from_size), map_(std::move(map)) {
  for (std::int64_t p : map_)
    if (p < 0 || p >= from_size_) throw IndexOutOfRange("projector map entry out of range");
}

void Projector::apply(std::span<const double> src, std::span<double> dst) const {
  if (static_cast<std::int64_t>(src.size()) != from_size_ ||
      static_cast<std::int64_t>(dst.size()) != target_size())
    throw DimensionMismatch("projector apply: size mismatch");
  for (std::size_t t = 0; t < map_.size(); ++t) dst[t] = src[static_cast<std::size_t>(map_[t])];
}

void Projector::apply_transpose(std::span<const double> src, std::span<double> dst) const {
  if (static_cast<std::int64_t>(src.size()) != target_size() ||
      static_cast<std::int64_t>(dst.size()) != from_size_)
    throw DimensionMismatch("projector apply_transpose: size mismatch");
  std::fill(dst.begin(), dst.end(), 0.0);
  for (std::size_t t = 0; t < map_.size(); ++t) dst[static_cast<std::size_t>(map_[t])] = src[t];
}

void Projector::scatter_add(std::span<const double> src, std::span<double> dst) const {
  if (static_cast<std::int64_t>(src.size()) != target_size() ||
      static_cast<std::int64_t>(dst.size()) != from_size_)
    throw DimensionMismatch("projector scatter_add: size mismatch");
  for (std::size_t t = 0; t < map_.size(); ++t) dst[static_cast<std::size_t>(map_[t])] += src[t];
}

GridFunction Projector::apply(const GridFunction& g) const {
  if (!(g.kind == from_)) throw InvalidKind("projector apply: expected " + from_.name() + ", got " + g.kind.name());
  GridFunction out(to_, target_size());
  apply(std::span<const double>(g.values), std::span<double>(out.values));
  return out;
}

GridFunction Projector::apply_transpose(const GridFunction& g) const {
  if (!(g.kind == to_)) throw InvalidKind("projector transpose: expected " + to_.name() + ", got " + g.kind.name());
  GridFunction out(from_, from_size_);
  apply_transpose(std::span<const double>(g.values), std::span<double>(out.values));
  return out;
}

Projector build_projector(const MeshConfig& config, const MeshKind& from, const MeshKind& to) {
  if (from.dim() != config.dim || to.dim() != config.dim)
    throw DimensionMismatch("projector kinds must match the mesh dimension");
  if (from.is_holes()) throw NotASubmesh("cannot project from the holes set");

  const std::int64_t from_size = config.point_count(from);

  if (to.is_holes()) {
    if (!from.is_fine()) throw NotASubmesh("holes are a subset of the fine mesh only");
    std::vector<std::int64_t> map;
    map.reserve(static_cast<std::size_t>(config.point_count(to)));
    for (const HoleBlock& b : hole_blocks(config))
      map.insert(map.end(), b.positions.begin(), b.positions.end());
    return Projector(from, to, from_size, std::move(map));
  }

  // Every coarse axis of the source must stay coarse in the target.
  if ((from.coarse_mask() & to.coarse_mask()) != from.coarse_mask())
    throw NotASubmesh(to.name() + " is not a sub-mesh of " + from.name());

  std::array<std::int64_t, kMaxDim> from_stride{};
  std::array<std::int64_t, kMaxDim> step{};  // source index per unit target index
  std::int64_t stride = 1;
  for (int a = 0; a < config.dim; ++a) {
    from_stride[static_cast<std::size_t>(a)] = stride;
    stride *= config.axis_points(from, a);
    step[static_cast<std::size_t>(a)] =
        (to.coarse_on(a) && !from.coarse_on(a)) ? config.factors[static_cast<std::size_t>(a)] : 1;
  }

  const std::int64_t to_size = config.point_count(to);
  std::vector<std::int64_t> map(static_cast<std::size_t>(to_size));
  std::array<int, kMaxDim> t{};
  for (int a = 0; a < config.dim; ++a) t[static_cast<std::size_t>(a)] = 1;
  for (std::int64_t lin = 0; lin < to_size; ++lin) {
    std::int64_t src = 0;
    for (int a = 0; a < config.dim; ++a)
      src += (static_cast<std::int64_t>(t[static_cast<std::size_t>(a)]) * step[static_cast<std::size_t>(a)] - 1) *
             from_stride[static_cast<std::size_t>(a)];
    map[static_cast<std::size_t>(lin)] = src;
    for (int a = 0; a < config.dim; ++a) {
      if (++t[static_cast<std::size_t>(a)] <= config.axis_points(to, a)) break;
      t[static_cast<std::size_t>(a)] = 1;
    }
  }
  return Projector(from, to, from_size, std::move(map));
}

std::vector<HoleBlock> hole_blocks(const MeshConfig& config) {
  std::array<std::int64_t, kMaxDim> fine_stride{};
  std::int64_t stride = 1;
  for (int a = 0; a < config.dim; ++a) {
    fine_stride[static_cast<std::size_t>(a)] = stride;
    stride *= config.fine_counts[static_cast<std::size_t>(a)];
  }

  std::array<int, kMaxDim> nblocks{};
  std::int64_t total_blocks = 1;
  for (int a = 0; a < config.dim; ++a) {
    nblocks[static_cast<std::size_t>(a)] = config.coarse_counts[static_cast<std::size_t>(a)] + 1;
    total_blocks *= nblocks[static_cast<std::size_t>(a)];
  }

  std::vector<HoleBlock> blocks;
  blocks.reserve(static_cast<std::size_t>(total_blocks));
  std::array<int, kMaxDim> h{};
  for (std::int64_t b = 0; b < total_blocks; ++b) {
    HoleBlock blk;
    blk.hole = h;
    std::int64_t npts = 1;
    for (int a = 0; a < config.dim; ++a) npts *= config.factors[static_cast<std::size_t>(a)] - 1;
    blk.positions.reserve(static_cast<std::size_t>(npts));

    std::array<int, kMaxDim> k{};
    for (int a = 0; a < config.dim; ++a) k[static_cast<std::size_t>(a)] = 1;
    for (std::int64_t p = 0; p < npts; ++p) {
      std::int64_t lin = 0;
      for (int a = 0; a < config.dim; ++a) {
        const int i = h[static_cast<std::size_t>(a)] * config.factors[static_cast<std::size_t>(a)] +
                      k[static_cast<std::size_t>(a)];
        lin += static_cast<std::int64_t>(i - 1) * fine_stride[static_cast<std::size_t>(a)];
      }
      blk.positions.push_back(lin);
      for (int a = 0; a < config.dim; ++a) {
        if (++k[static_cast<std::size_t>(a)] <= config.factors[static_cast<std::size_t>(a)] - 1) break;
        k[static_cast<std::size_t>(a)] = 1;
      }
    }
    blocks.push_back(std::move(blk));
    for (int a = 0; a < config.dim; ++a) {
      if (++h[static_cast<std::size_t>(a)] < nblocks[static_cast<std::size_t>(a)]) break;
      h[static_cast<std::size_t>(a)] = 0;
    }
  }
  return blocks;
}

}  // namespace asdsm
