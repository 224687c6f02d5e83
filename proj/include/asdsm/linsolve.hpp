#pragma once

#include <memory>
#include <vector>

#include "asdsm/fdm.hpp"
#include "asdsm/mesh.hpp"
#include "asdsm/sparse.hpp"

namespace asdsm {

// Worker-count policy: requested >= 0 wins, otherwise the ASDSM_WORKERS
// environment variable, otherwise hardware concurrency. 0 and 1 both mean
// serial. Results are bitwise independent of the worker count.
int resolve_workers(int requested);

// Sparse LU factorization of a square matrix. Cheap to copy (shared state);
// solves on a factorized matrix are const and thread-safe.
class Factorization {
 public:
  explicit Factorization(const SparseMatrix& A);  // throws SingularMatrix

  std::vector<double> solve(std::span<const double> b) const;
  GridFunction solve(const GridFunction& b) const;
  std::int64_t size() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// Per-hole diagonal blocks of A_ff extracted and factorized once. When every
// block is entrywise identical to the first (translation-invariant operator),
// a single factorization is shared.
class HoleSolvePlan {
 public:
  HoleSolvePlan(const MeshConfig& config, const SparseMatrix& A_ff, std::vector<HoleBlock> blocks);

  const std::vector<HoleBlock>& blocks() const { return blocks_; }
  bool shared_factorization() const { return shared_; }
  std::int64_t total_points() const { return total_; }

  // rhs and result are in concatenated block order (the holes-kind layout).
  std::vector<double> solve(std::span<const double> rhs_holes, int workers = -1) const;

 private:
  std::vector<HoleBlock> blocks_;
  std::vector<std::int64_t> offsets_;
  std::vector<Factorization> factors_;  // one if shared_, else one per block
  bool shared_ = false;
  std::int64_t total_ = 0;
};

// Solve the independent hole systems; rhs_holes lives on the holes kind.
GridFunction solve_holes(const MeshConfig& config, const SparseMatrix& A_ff,
                         const GridFunction& rhs_holes, const std::vector<HoleBlock>& blocks,
                         int workers = -1);

// Direct solve of the full fine-mesh system; the reference everything else is
// measured against in tests. Intended for test-scale meshes.
GridFunction oracle_solve_fine(const MeshConfig& config, const ProblemSpec& problem);

}  // namespace asdsm
