#include "asdsm/linsolve.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>

namespace asdsm {

int resolve_workers(int requested) {
  long w = -1;
  if (requested >= 0) {
    w = requested;
  } else if (const char* env = std::getenv("ASDSM_WORKERS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && parsed >= 0) w = parsed;
  }
  if (w < 0) w = static_cast<long>(std::thread::hardware_concurrency());
  return static_cast<int>(std::clamp(w, 0L, 256L));
}

struct Factorization::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  std::int64_t n = 0;
};

Factorization::Factorization(const SparseMatrix& A) {
  if (A.rows() != A.cols()) throw DimensionMismatch("factorization requires a square matrix");
  auto impl = std::make_shared<Impl>();
  impl->n = A.rows();

  Eigen::SparseMatrix<double> m(static_cast<int>(A.rows()), static_cast<int>(A.cols()));
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(A.nnz()));
  const auto rp = A.row_ptr();
  const auto ci = A.col_indices();
  const auto v = A.values();
  for (std::int64_t r = 0; r < A.rows(); ++r)
    for (std::int64_t k = rp[static_cast<std::size_t>(r)]; k < rp[static_cast<std::size_t>(r) + 1]; ++k)
      trip.emplace_back(static_cast<int>(r), static_cast<int>(ci[static_cast<std::size_t>(k)]),
                        v[static_cast<std::size_t>(k)]);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();

  impl->lu.analyzePattern(m);
  impl->lu.factorize(m);
  if (impl->lu.info() != Eigen::Success)
    throw SingularMatrix("sparse LU failed: " + impl->lu.lastErrorMessage());
  impl_ = std::move(impl);
}

std::vector<double> Factorization::solve(std::span<const double> b) const {
  if (static_cast<std::int64_t>(b.size()) != impl_->n)
    throw DimensionMismatch("solve: rhs length does not match the matrix");
  Eigen::VectorXd rhs(impl_->n);
  for (std::int64_t i = 0; i < impl_->n; ++i) rhs[i] = b[static_cast<std::size_t>(i)];
  Eigen::VectorXd x = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success) throw SingularMatrix("sparse LU back-substitution failed");
  return std::vector<double>(x.data(), x.data() + impl_->n);
}

GridFunction Factorization::solve(const GridFunction& b) const {
  return GridFunction(b.kind, solve(std::span<const double>(b.values)));
}

std::int64_t Factorization::size() const { return impl_->n; }

namespace {

std::string hole_name(const MeshConfig& config, const HoleBlock& b) {
  std::string s = "(";
  for (int a = 0; a < config.dim; ++a) {
    if (a) s += ',';
    s += std::to_string(b.hole[static_cast<std::size_t>(a)]);
  }
  return s + ")";
}

// Static contiguous split of [0, n); worker results land in disjoint output
// slices, so the result is identical for any worker count. The first thrown
// exception (lowest chunk) is rethrown.
void parallel_chunks(std::int64_t n, int workers, const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (n <= 0) return;
  const int w = static_cast<int>(std::clamp<std::int64_t>(workers, 1, n));
  if (w <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  const std::int64_t q = n / w, rem = n % w;
  std::int64_t begin = 0;
  for (int t = 0; t < w; ++t) {
    const std::int64_t len = q + (t < rem ? 1 : 0);
    const std::int64_t b = begin, e = begin + len;
    begin = e;
    threads.emplace_back([&, t, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace

HoleSolvePlan::HoleSolvePlan(const MeshConfig& config, const SparseMatrix& A_ff,
                             std::vector<HoleBlock> blocks)
    : blocks_(std::move(blocks)) {
  if (A_ff.rows() != config.point_count(MeshKind::fine(config.dim)))
    throw DimensionMismatch("hole plan: operator is not the fine-mesh operator");

  offsets_.reserve(blocks_.size() + 1);
  offsets_.push_back(0);
  std::vector<SparseMatrix> mats;
  mats.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    mats.push_back(A_ff.extract_block(b.positions));
    offsets_.push_back(offsets_.back() + static_cast<std::int64_t>(b.positions.size()));
  }
  total_ = offsets_.back();

  shared_ = !mats.empty();
  for (std::size_t i = 1; i < mats.size(); ++i)
    if (!(mats[i] == mats[0])) {
      shared_ = false;
      break;
    }

  const auto factor_block = [&](std::size_t i) {
    try {
      return Factorization(mats[i]);
    } catch (const SingularMatrix& e) {
      throw SingularMatrix("hole " + hole_name(config, blocks_[i]) + ": " + e.what());
    }
  };
  if (shared_) {
    factors_.push_back(factor_block(0));
  } else {
    factors_.reserve(mats.size());
    for (std::size_t i = 0; i < mats.size(); ++i) factors_.push_back(factor_block(i));
  }
}

std::vector<double> HoleSolvePlan::solve(std::span<const double> rhs_holes, int workers) const {
  if (static_cast<std::int64_t>(rhs_holes.size()) != total_)
    throw DimensionMismatch("hole solve: rhs length mismatch");
  std::vector<double> out(static_cast<std::size_t>(total_));
  const int w = resolve_workers(workers);
  parallel_chunks(static_cast<std::int64_t>(blocks_.size()), w, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      const auto& f = shared_ ? factors_[0] : factors_[static_cast<std::size_t>(i)];
      const std::int64_t off = offsets_[static_cast<std::size_t>(i)];
      const std::int64_t len = offsets_[static_cast<std::size_t>(i) + 1] - off;
      const auto x = f.solve(rhs_holes.subspan(static_cast<std::size_t>(off), static_cast<std::size_t>(len)));
      std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(off));
    }
  });
  return out;
}

GridFunction solve_holes(const MeshConfig& config, const SparseMatrix& A_ff,
                         const GridFunction& rhs_holes, const std::vector<HoleBlock>& blocks,
                         int workers) {
  const MeshKind holes = MeshKind::holes(config.dim);
  if (!(rhs_holes.kind == holes)) throw InvalidKind("solve_holes: rhs must live on the holes set");
  HoleSolvePlan plan(config, A_ff, blocks);
  return GridFunction(holes, plan.solve(rhs_holes.values, workers));
}

GridFunction oracle_solve_fine(const MeshConfig& config, const ProblemSpec& problem) {
  const MeshKind fine = MeshKind::fine(config.dim);
  const SparseMatrix A = assemble_operator(config, fine, problem);
  const GridFunction b = assemble_rhs(config, fine, problem);
  return Factorization(A).solve(b);
}

}  // namespace asdsm
