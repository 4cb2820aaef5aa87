#pragma once

#include <vector>

#include "lanegcn/tensor.hpp"

namespace lanegcn {

struct Triplet {
  long row = 0;
  long col = 0;
  double value = 1.0;
};

// Immutable sparse matrix in compressed row form. Column indices are
// strictly increasing within each row; duplicate triplets are summed at
// construction.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(long rows, long cols, std::vector<long> row_offsets,
               std::vector<long> col_indices, std::vector<double> values);

  static SparseMatrix from_triplets(long rows, long cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(long n);

  long rows() const { return rows_; }
  long cols() const { return cols_; }
  long nnz() const { return static_cast<long>(values_.size()); }

  const std::vector<long>& row_offsets() const { return row_offsets_; }
  const std::vector<long>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  SparseMatrix transpose() const;
  SparseMatrix multiply(const SparseMatrix& other) const;
  SparseMatrix plus(const SparseMatrix& other) const;
  // Entries clamped to {0, 1}: nonzero -> 1.
  SparseMatrix binarized() const;

  double at(long row, long col) const;
  Tensor densify() const;

  // Checks the compressed-row invariants, throws std::invalid_argument.
  void validate() const;

 private:
  long rows_ = 0;
  long cols_ = 0;
  std::vector<long> row_offsets_{0};
  std::vector<long> col_indices_;
  std::vector<double> values_;
};

// k-th matrix power of a square sparse matrix, k >= 1. With binarize the
// product is taken in the boolean semiring: an entry is 1 iff a length-k
// path exists.
SparseMatrix sparse_power(const SparseMatrix& a, int k, bool binarize = true);

// A [n x n] times X [n x f]; equals densify(A) * X. Differentiable in X:
// backward routes dX += A^T * dY.
Tensor sparse_dense_matmul(const SparseMatrix& a, const Tensor& x);

// D^(-1/2) (I + A) D^(-1/2), with D the degree matrix of I + A. Defined for
// any square sparse adjacency; isolated nodes get degree 1 from the self
// connection, so the normalization is never singular.
SparseMatrix normalized_laplacian(const SparseMatrix& adjacency);

}  // namespace lanegcn
