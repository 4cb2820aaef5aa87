#include <doctest.h>

#include "lanegcn/gradcheck.hpp"
#include "lanegcn/ops.hpp"
#include "lanegcn/sparse.hpp"
#include "lanegcn/tape.hpp"
#include "oracles.hpp"

using namespace lanegcn;

namespace {

SparseMatrix superdiagonal(long n) {
  std::vector<Triplet> t;
  for (long i = 0; i + 1 < n; ++i) t.push_back({i, i + 1, 1.0});
  return SparseMatrix::from_triplets(n, n, t);
}

SparseMatrix random_sparse(oracle::Rng& rng, long n, double density,
                           bool binary = true) {
  std::vector<Triplet> t;
  for (long r = 0; r < n; ++r) {
    for (long c = 0; c < n; ++c) {
      if (rng.uniform(0, 1) < density) {
        t.push_back({r, c, binary ? 1.0 : rng.uniform(-2, 2)});
      }
    }
  }
  return SparseMatrix::from_triplets(n, n, t);
}

// Random DAG adjacency: edges only from lower to strictly higher index.
SparseMatrix random_dag(oracle::Rng& rng, long n, double density) {
  std::vector<Triplet> t;
  for (long r = 0; r < n; ++r) {
    for (long c = r + 1; c < n; ++c) {
      if (rng.uniform(0, 1) < density) t.push_back({r, c, 1.0});
    }
  }
  return SparseMatrix::from_triplets(n, n, t);
}

}  // namespace

TEST_CASE("compressed-row invariants are enforced") {
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 1}, {0}, {1.0}),
                  std::invalid_argument);  // offsets too short
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 2, 1}, {0, 1}, {1.0, 1.0}),
                  std::invalid_argument);  // decreasing offsets
  CHECK_THROWS_AS(SparseMatrix(1, 2, {0, 2}, {1, 1}, {1.0, 1.0}),
                  std::invalid_argument);  // repeated column
  CHECK_THROWS_AS(SparseMatrix(1, 2, {0, 1}, {2}, {1.0}),
                  std::invalid_argument);  // column out of range
  SparseMatrix ok(2, 3, {0, 2, 2}, {0, 2}, {1.0, -1.0});
  CHECK(ok.nnz() == 2);
  CHECK(ok.at(0, 2) == -1.0);
  CHECK(ok.at(1, 0) == 0.0);
}

TEST_CASE("from_triplets sums duplicates and sorts columns") {
  SparseMatrix m = SparseMatrix::from_triplets(
      2, 2, {{0, 1, 2.0}, {0, 0, 1.0}, {0, 1, 3.0}});
  CHECK(m.nnz() == 2);
  CHECK(m.at(0, 0) == 1.0);
  CHECK(m.at(0, 1) == 5.0);
  m.validate();
}

TEST_CASE("transpose flips coordinates") {
  oracle::Rng rng(3);
  SparseMatrix m = random_sparse(rng, 12, 0.2, false);
  SparseMatrix mt = m.transpose();
  for (long r = 0; r < 12; ++r) {
    for (long c = 0; c < 12; ++c) {
      CHECK(m.at(r, c) == mt.at(c, r));
    }
  }
}

TEST_CASE("sparse_dense_matmul of an empty matrix is zero") {
  SparseMatrix empty = SparseMatrix::from_triplets(3, 3, {});
  oracle::Rng rng(5);
  Tensor x = rng.tensor({3, 4});
  Tensor y = sparse_dense_matmul(empty, x);
  for (long i = 0; i < y.size(); ++i) CHECK(y.at(i) == 0.0);
}

TEST_CASE("superdiagonal sparse matrix shifts rows up") {
  Tensor x = Tensor::matrix({{1}, {2}, {3}});
  Tensor y = sparse_dense_matmul(superdiagonal(3), x);
  CHECK(y.at(0, 0) == 2.0);
  CHECK(y.at(1, 0) == 3.0);
  CHECK(y.at(2, 0) == 0.0);
}

TEST_CASE("sparse_dense_matmul equals densified matmul") {
  oracle::Rng rng(9);
  SparseMatrix a = random_sparse(rng, 20, 0.1, false);
  Tensor x = rng.tensor({20, 5});
  Tensor dense = matmul(a.densify(), x);
  Tensor sparse = sparse_dense_matmul(a, x);
  for (long i = 0; i < dense.size(); ++i) {
    CHECK(std::fabs(dense.at(i) - sparse.at(i)) <= 1e-12);
  }
}

TEST_CASE("sparse_dense_matmul routes gradients through the transpose") {
  oracle::Rng rng(15);
  SparseMatrix a = random_sparse(rng, 8, 0.3, false);
  Tensor x = rng.tensor({8, 3});
  GradCheckReport report = check_gradients(
      {{"x", x}}, [&] { return sum(sparse_dense_matmul(a, x)); });
  CHECK(report.max_rel_error <= 1e-5);
}

TEST_CASE("sparse_power of a chain shifts by k") {
  SparseMatrix shift = superdiagonal(5);
  SparseMatrix s2 = sparse_power(shift, 2);
  CHECK(s2.nnz() == 3);
  for (long i = 0; i + 2 < 5; ++i) CHECK(s2.at(i, i + 2) == 1.0);
}

TEST_CASE("sparse_power with k=1 returns the matrix unchanged") {
  oracle::Rng rng(21);
  SparseMatrix a = random_sparse(rng, 10, 0.2, false);
  SparseMatrix p = sparse_power(a, 1, /*binarize=*/false);
  for (long r = 0; r < 10; ++r) {
    for (long c = 0; c < 10; ++c) CHECK(p.at(r, c) == a.at(r, c));
  }
}

TEST_CASE("sparse_power rejects k below 1") {
  CHECK_THROWS_AS(sparse_power(superdiagonal(3), 0), std::invalid_argument);
}

TEST_CASE("binarized powers equal thresholded dense powers on random DAGs") {
  oracle::Rng rng(27);
  for (int trial = 0; trial < 20; ++trial) {
    const long n = rng.integer(5, 30);
    SparseMatrix a = random_dag(rng, n, 0.15);
    oracle::Mat dense = oracle::to_mat(a.densify());
    for (int k : {2, 4, 8}) {
      SparseMatrix p = sparse_power(a, k, /*binarize=*/true);
      oracle::Mat expect = oracle::bool_power(dense, k);
      for (long r = 0; r < n; ++r) {
        for (long c = 0; c < n; ++c) {
          CHECK(p.at(r, c) == expect[r][c]);
        }
      }
    }
  }
}

TEST_CASE("numeric powers count walks") {
  oracle::Rng rng(33);
  SparseMatrix a = random_sparse(rng, 10, 0.3);
  oracle::Mat expect = oracle::numeric_power(oracle::to_mat(a.densify()), 3);
  SparseMatrix p = sparse_power(a, 3, /*binarize=*/false);
  for (long r = 0; r < 10; ++r) {
    for (long c = 0; c < 10; ++c) {
      CHECK(p.at(r, c) == doctest::Approx(expect[r][c]).epsilon(1e-12));
    }
  }
}

TEST_CASE("normalized laplacian of two connected nodes") {
  SparseMatrix a =
      SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  SparseMatrix l = normalized_laplacian(a);
  for (long r = 0; r < 2; ++r) {
    for (long c = 0; c < 2; ++c) {
      CHECK(l.at(r, c) == doctest::Approx(0.5).epsilon(1e-12));
    }
  }
}

TEST_CASE("normalized laplacian of an isolated node is one") {
  SparseMatrix l = normalized_laplacian(SparseMatrix::from_triplets(1, 1, {}));
  CHECK(l.at(0, 0) == doctest::Approx(1.0));
}
