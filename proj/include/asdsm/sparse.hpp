#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "asdsm/errors.hpp"

namespace asdsm {

// Immutable CSR matrix. Columns are strictly increasing within each row, so
// structural equality is well defined entrywise.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::int64_t rows, std::int64_t cols, std::vector<std::int64_t> row_ptr,
               std::vector<std::int64_t> col, std::vector<double> val);

  static SparseMatrix identity(std::int64_t n);

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  std::int64_t nnz() const { return static_cast<std::int64_t>(col_.size()); }

  std::span<const std::int64_t> row_ptr() const { return row_ptr_; }
  std::span<const std::int64_t> col_indices() const { return col_; }
  std::span<const double> values() const { return val_; }

  std::span<const std::int64_t> row_cols(std::int64_t r) const;
  std::span<const double> row_vals(std::int64_t r) const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  // Single row of A*x; used to evaluate residuals on a subset of rows.
  double row_dot(std::int64_t r, std::span<const double> x) const;

  // Principal submatrix on `positions` (ascending row=column index list),
  // entries renumbered to local indices. Couplings leaving the set are dropped.
  SparseMatrix extract_block(std::span<const std::int64_t> positions) const;

  double norm_inf() const;  // max absolute row sum

  // Exact structural and numerical equality.
  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::int64_t rows_ = 0, cols_ = 0;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<std::int64_t> col_;
  std::vector<double> val_;
};

// Row-by-row CSR assembly; rows are finished in order, columns added ascending.
class SparseBuilder {
 public:
  SparseBuilder(std::int64_t rows, std::int64_t cols);
  void add(std::int64_t col, double val);
  void next_row();
  SparseMatrix finish();

 private:
  std::int64_t rows_, cols_, current_row_ = 0;
  std::vector<std::int64_t> row_ptr_;
  std::vector<std::int64_t> col_;
  std::vector<double> val_;
};

}  // namespace asdsm
