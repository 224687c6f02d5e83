#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "asdsm/sparse.hpp"

using namespace asdsm;

namespace {

// | 2 -1  0  0 |
// |-1  2 -1  0 |
// | 0 -1  2 -1 |
// | 0  0 -1  2 |
SparseMatrix laplacian4() {
  SparseBuilder b(4, 4);
  b.add(0, 2.0);
  b.add(1, -1.0);
  b.next_row();
  b.add(0, -1.0);
  b.add(1, 2.0);
  b.add(2, -1.0);
  b.next_row();
  b.add(1, -1.0);
  b.add(2, 2.0);
  b.add(3, -1.0);
  b.next_row();
  b.add(2, -1.0);
  b.add(3, 2.0);
  b.next_row();
  return b.finish();
}

}  // namespace

TEST_CASE("builder produces the expected CSR arrays") {
  const SparseMatrix a = laplacian4();
  CHECK(a.rows() == 4);
  CHECK(a.cols() == 4);
  CHECK(a.nnz() == 10);
  CHECK(a.row_ptr()[2] == 5);
  CHECK(a.row_cols(1).size() == 3);
  CHECK(a.row_cols(1)[0] == 0);
  CHECK(a.row_vals(1)[1] == 2.0);
}

TEST_CASE("malformed CSR arrays are rejected") {
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 1}, {0}, {1.0}), DimensionMismatch);       // row_ptr short
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 1, 3}, {0}, {1.0}), DimensionMismatch);    // back mismatch
  CHECK_THROWS_AS(SparseMatrix(1, 2, {0, 2}, {1, 0}, {1.0, 1.0}), DimensionMismatch);  // not increasing
  CHECK_THROWS_AS(SparseMatrix(1, 2, {0, 2}, {0, 0}, {1.0, 1.0}), DimensionMismatch);  // duplicate
  CHECK_THROWS_AS(SparseMatrix(1, 2, {0, 1}, {2}, {1.0}), IndexOutOfRange);         // column range
}

TEST_CASE("builder misuse is rejected") {
  SparseBuilder b(2, 2);
  b.add(0, 1.0);
  CHECK_THROWS_AS(b.add(0, 1.0), DimensionMismatch);  // non-increasing column
  CHECK_THROWS_AS(b.add(2, 1.0), IndexOutOfRange);
  b.next_row();
  CHECK_THROWS_AS(b.finish(), DimensionMismatch);     // row 1 not finished
  b.next_row();
  CHECK_THROWS_AS(b.next_row(), IndexOutOfRange);
}

TEST_CASE("identity and matvec") {
  const SparseMatrix id = SparseMatrix::identity(3);
  const std::vector<double> x{1.0, -2.0, 3.0};
  CHECK(id.multiply(x) == x);

  const SparseMatrix a = laplacian4();
  const std::vector<double> ones{1.0, 1.0, 1.0, 1.0};
  const std::vector<double> y = a.multiply(ones);
  CHECK(y == std::vector<double>{1.0, 0.0, 0.0, 1.0});

  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(a.row_dot(0, v) == 0.0);    // 2*1 - 2
  CHECK(a.row_dot(2, v) == 0.0);    // -2 + 6 - 4
  CHECK(a.row_dot(3, v) == 5.0);    // -3 + 8
  CHECK_THROWS_AS(a.row_dot(4, v), IndexOutOfRange);

  const std::vector<double> bad{1.0};
  CHECK_THROWS_AS(a.multiply(bad), DimensionMismatch);
}

TEST_CASE("block extraction drops couplings that leave the set") {
  const SparseMatrix a = laplacian4();
  const std::vector<std::int64_t> pos{1, 2};
  const SparseMatrix blk = a.extract_block(pos);
  CHECK(blk.rows() == 2);
  // | 2 -1 |
  // |-1  2 |   (the -1 couplings to rows 0 and 3 are dropped)
  CHECK(blk.nnz() == 4);
  CHECK(blk.row_vals(0)[0] == 2.0);
  CHECK(blk.row_vals(0)[1] == -1.0);
  CHECK(blk.row_vals(1)[0] == -1.0);

  const std::vector<std::int64_t> unsorted{2, 1};
  CHECK_THROWS_AS(a.extract_block(unsorted), DimensionMismatch);
  const std::vector<std::int64_t> outside{1, 7};
  CHECK_THROWS_AS(a.extract_block(outside), IndexOutOfRange);

  // Extracting everything reproduces the matrix exactly.
  const std::vector<std::int64_t> all{0, 1, 2, 3};
  CHECK(a.extract_block(all) == a);
}

TEST_CASE("structural equality is entrywise") {
  const SparseMatrix a = laplacian4();
  const SparseMatrix b = laplacian4();
  CHECK(a == b);
  SparseBuilder c(4, 4);
  for (int r = 0; r < 4; ++r) {
    c.add(r, 2.0);
    c.next_row();
  }
  CHECK(!(a == c.finish()));
}

TEST_CASE("infinity norm is the max absolute row sum") {
  CHECK(laplacian4().norm_inf() == 4.0);
  CHECK(SparseMatrix::identity(5).norm_inf() == 1.0);
  CHECK(SparseMatrix(2, 2, {0, 0, 0}, {}, {}).norm_inf() == 0.0);
}
