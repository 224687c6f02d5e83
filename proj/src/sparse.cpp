#include "asdsm/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace asdsm {

SparseMatrix::SparseMatrix(std::int64_t rows, std::int64_t cols, std::vector<std::int64_t> row_ptr,
                           std::vector<std::int64_t> col, std::vector<double> val)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_(std::move(col)), val_(std::move(val)) {
  if (rows_ < 0 || cols_ < 0 || static_cast<std::int64_t>(row_ptr_.size()) != rows_ + 1 ||
      col_.size() != val_.size() || row_ptr_.front() != 0 ||
      row_ptr_.back() != static_cast<std::int64_t>(col_.size()))
    throw DimensionMismatch("malformed CSR arrays");
  for (std::int64_t r = 0; r < rows_; ++r) {
    if (row_ptr_[static_cast<std::size_t>(r)] > row_ptr_[static_cast<std::size_t>(r) + 1])
      throw DimensionMismatch("CSR row pointers not monotone");
    for (std::int64_t k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k) {
      if (col_[static_cast<std::size_t>(k)] < 0 || col_[static_cast<std::size_t>(k)] >= cols_)
        throw IndexOutOfRange("CSR column index out of range");
      if (k > row_ptr_[static_cast<std::size_t>(r)] &&
          col_[static_cast<std::size_t>(k)] <= col_[static_cast<std::size_t>(k - 1)])
        throw DimensionMismatch("CSR columns not strictly increasing within a row");
    }
  }
}

SparseMatrix SparseMatrix::identity(std::int64_t n) {
  std::vector<std::int64_t> rp(static_cast<std::size_t>(n) + 1);
  std::vector<std::int64_t> col(static_cast<std::size_t>(n));
  std::vector<double> val(static_cast<std::size_t>(n), 1.0);
  for (std::int64_t i = 0; i <= n; ++i) rp[static_cast<std::size_t>(i)] = i;
  for (std::int64_t i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = i;
  return SparseMatrix(n, n, std::move(rp), std::move(col), std::move(val));
}

std::span<const std::int64_t> SparseMatrix::row_cols(std::int64_t r) const {
  const auto b = static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(r)]);
  const auto e = static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(r) + 1]);
  return {col_.data() + b, e - b};
}

std::span<const double> SparseMatrix::row_vals(std::int64_t r) const {
  const auto b = static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(r)]);
  const auto e = static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(r) + 1]);
  return {val_.data() + b, e - b};
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (static_cast<std::int64_t>(x.size()) != cols_ || static_cast<std::int64_t>(y.size()) != rows_)
    throw DimensionMismatch("matvec size mismatch");
  for (std::int64_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::int64_t k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k)
      s += val_[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col_[static_cast<std::size_t>(k)])];
    y[static_cast<std::size_t>(r)] = s;
  }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(static_cast<std::size_t>(rows_));
  multiply(x, y);
  return y;
}

double SparseMatrix::row_dot(std::int64_t r, std::span<const double> x) const {
  if (r < 0 || r >= rows_) throw IndexOutOfRange("row index out of range");
  if (static_cast<std::int64_t>(x.size()) != cols_) throw DimensionMismatch("row_dot size mismatch");
  double s = 0.0;
  for (std::int64_t k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k)
    s += val_[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col_[static_cast<std::size_t>(k)])];
  return s;
}

SparseMatrix SparseMatrix::extract_block(std::span<const std::int64_t> positions) const {
  if (rows_ != cols_) throw DimensionMismatch("block extraction requires a square matrix");
  const std::int64_t m = static_cast<std::int64_t>(positions.size());
  std::vector<std::int64_t> local(static_cast<std::size_t>(cols_), -1);
  for (std::int64_t i = 0; i < m; ++i) {
    const std::int64_t p = positions[static_cast<std::size_t>(i)];
    if (p < 0 || p >= rows_) throw IndexOutOfRange("block position out of range");
    if (i > 0 && p <= positions[static_cast<std::size_t>(i - 1)])
      throw DimensionMismatch("block positions must be strictly increasing");
    local[static_cast<std::size_t>(p)] = i;
  }
  SparseBuilder b(m, m);
  for (std::int64_t i = 0; i < m; ++i) {
    const std::int64_t r = positions[static_cast<std::size_t>(i)];
    const auto cols = row_cols(r);
    const auto vals = row_vals(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const std::int64_t lc = local[static_cast<std::size_t>(cols[k])];
      if (lc >= 0) b.add(lc, vals[k]);
    }
    b.next_row();
  }
  return b.finish();
}

double SparseMatrix::norm_inf() const {
  double m = 0.0;
  for (std::int64_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (double v : row_vals(r)) s += std::abs(v);
    m = std::max(m, s);
  }
  return m;
}

SparseBuilder::SparseBuilder(std::int64_t rows, std::int64_t cols) : rows_(rows), cols_(cols) {
  row_ptr_.reserve(static_cast<std::size_t>(rows) + 1);
  row_ptr_.push_back(0);
}

void SparseBuilder::add(std::int64_t col, double val) {
  if (current_row_ >= rows_) throw IndexOutOfRange("builder: all rows already finished");
  if (col < 0 || col >= cols_) throw IndexOutOfRange("builder: column out of range");
  if (static_cast<std::int64_t>(col_.size()) > row_ptr_.back() && col <= col_.back())
    throw DimensionMismatch("builder: columns must be added in increasing order");
  col_.push_back(col);
  val_.push_back(val);
}

void SparseBuilder::next_row() {
  if (current_row_ >= rows_) throw IndexOutOfRange("builder: too many rows");
  ++current_row_;
  row_ptr_.push_back(static_cast<std::int64_t>(col_.size()));
}

SparseMatrix SparseBuilder::finish() {
  if (current_row_ != rows_) throw DimensionMismatch("builder: not all rows finished");
  return SparseMatrix(rows_, cols_, std::move(row_ptr_), std::move(col_), std::move(val_));
}

}  // namespace asdsm
