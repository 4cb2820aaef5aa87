#include "lanegcn/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lanegcn/tape.hpp"

namespace lanegcn {

SparseMatrix::SparseMatrix(long rows, long cols, std::vector<long> row_offsets,
                           std::vector<long> col_indices,
                           std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  validate();
}

void SparseMatrix::validate() const {
  if (rows_ < 0 || cols_ < 0) {
    throw std::invalid_argument("sparse matrix with negative extent");
  }
  if (static_cast<long>(row_offsets_.size()) != rows_ + 1) {
    throw std::invalid_argument("row_offsets must have length rows+1");
  }
  if (row_offsets_.front() != 0 ||
      row_offsets_.back() != static_cast<long>(values_.size()) ||
      col_indices_.size() != values_.size()) {
    throw std::invalid_argument("row_offsets inconsistent with nnz");
  }
  for (long r = 0; r < rows_; ++r) {
    if (row_offsets_[r] > row_offsets_[r + 1]) {
      throw std::invalid_argument("row_offsets must be nondecreasing");
    }
    for (long i = row_offsets_[r]; i < row_offsets_[r + 1]; ++i) {
      if (col_indices_[i] < 0 || col_indices_[i] >= cols_) {
        throw std::invalid_argument("column index out of range");
      }
      if (i > row_offsets_[r] && col_indices_[i] <= col_indices_[i - 1]) {
        throw std::invalid_argument(
            "column indices must be strictly increasing within a row");
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(long rows, long cols,
                                         std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  std::vector<long> offsets(rows + 1, 0);
  std::vector<long> cols_out;
  std::vector<double> vals_out;
  cols_out.reserve(triplets.size());
  vals_out.reserve(triplets.size());
  for (size_t i = 0; i < triplets.size();) {
    const long r = triplets[i].row;
    const long c = triplets[i].col;
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      throw std::invalid_argument("triplet outside matrix extents");
    }
    double v = 0.0;
    while (i < triplets.size() && triplets[i].row == r &&
           triplets[i].col == c) {
      v += triplets[i].value;
      ++i;
    }
    cols_out.push_back(c);
    vals_out.push_back(v);
    offsets[r + 1] = static_cast<long>(cols_out.size());
  }
  for (long r = 0; r < rows; ++r) {
    offsets[r + 1] = std::max(offsets[r + 1], offsets[r]);
  }
  return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_out),
                      std::move(vals_out));
}

SparseMatrix SparseMatrix::identity(long n) {
  std::vector<long> offsets(n + 1);
  std::vector<long> cols(n);
  std::vector<double> vals(n, 1.0);
  for (long i = 0; i <= n; ++i) offsets[i] = i;
  for (long i = 0; i < n; ++i) cols[i] = i;
  return SparseMatrix(n, n, std::move(offsets), std::move(cols),
                      std::move(vals));
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<long> offsets(cols_ + 1, 0);
  for (long c : col_indices_) ++offsets[c + 1];
  for (long c = 0; c < cols_; ++c) offsets[c + 1] += offsets[c];
  std::vector<long> cols_out(values_.size());
  std::vector<double> vals_out(values_.size());
  std::vector<long> cursor(offsets.begin(), offsets.end() - 1);
  for (long r = 0; r < rows_; ++r) {
    for (long i = row_offsets_[r]; i < row_offsets_[r + 1]; ++i) {
      const long c = col_indices_[i];
      cols_out[cursor[c]] = r;
      vals_out[cursor[c]] = values_[i];
      ++cursor[c];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(offsets), std::move(cols_out),
                      std::move(vals_out));
}

SparseMatrix SparseMatrix::multiply(const SparseMatrix& other) const {
  if (cols_ != other.rows_) {
    throw std::invalid_argument("sparse multiply dimension mismatch");
  }
  std::vector<Triplet> result;
  std::vector<double> accum(other.cols_, 0.0);
  std::vector<long> touched;
  for (long r = 0; r < rows_; ++r) {
    touched.clear();
    for (long i = row_offsets_[r]; i < row_offsets_[r + 1]; ++i) {
      const long k = col_indices_[i];
      const double v = values_[i];
      for (long j = other.row_offsets_[k]; j < other.row_offsets_[k + 1];
           ++j) {
        const long c = other.col_indices_[j];
        if (accum[c] == 0.0) touched.push_back(c);
        accum[c] += v * other.values_[j];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (long c : touched) {
      if (accum[c] != 0.0) result.push_back({r, c, accum[c]});
      accum[c] = 0.0;
    }
  }
  return from_triplets(rows_, other.cols_, std::move(result));
}

SparseMatrix SparseMatrix::plus(const SparseMatrix& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw std::invalid_argument("sparse add extent mismatch");
  }
  std::vector<Triplet> result;
  result.reserve(values_.size() + other.values_.size());
  for (long r = 0; r < rows_; ++r) {
    for (long i = row_offsets_[r]; i < row_offsets_[r + 1]; ++i) {
      result.push_back({r, col_indices_[i], values_[i]});
    }
    for (long i = other.row_offsets_[r]; i < other.row_offsets_[r + 1]; ++i) {
      result.push_back({r, other.col_indices_[i], other.values_[i]});
    }
  }
  return from_triplets(rows_, cols_, std::move(result));
}

SparseMatrix SparseMatrix::binarized() const {
  SparseMatrix out = *this;
  for (double& v : out.values_) v = v != 0.0 ? 1.0 : 0.0;
  return out;
}

double SparseMatrix::at(long row, long col) const {
  if (row < 0 || row >= rows_ || col < 0 || col >= cols_) {
    throw std::out_of_range("sparse access out of range");
  }
  for (long i = row_offsets_[row]; i < row_offsets_[row + 1]; ++i) {
    if (col_indices_[i] == col) return values_[i];
  }
  return 0.0;
}

Tensor SparseMatrix::densify() const {
  Tensor out = Tensor::zeros({rows_, cols_});
  double* po = out.mutable_data();
  for (long r = 0; r < rows_; ++r) {
    for (long i = row_offsets_[r]; i < row_offsets_[r + 1]; ++i) {
      po[r * cols_ + col_indices_[i]] = values_[i];
    }
  }
  return out;
}

SparseMatrix sparse_power(const SparseMatrix& a, int k, bool binarize) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("sparse_power expects a square matrix");
  }
  if (k < 1) {
    throw std::invalid_argument("sparse_power expects k >= 1, got " +
                                std::to_string(k));
  }
  // Exponentiation by squaring. In the boolean semiring binarizing after
  // each product preserves reachability, since all values stay nonnegative.
  SparseMatrix base = binarize ? a.binarized() : a;
  SparseMatrix result = SparseMatrix::identity(a.rows());
  int e = k;
  while (e > 0) {
    if (e & 1) {
      result = result.multiply(base);
      if (binarize) result = result.binarized();
    }
    e >>= 1;
    if (e > 0) {
      base = base.multiply(base);
      if (binarize) base = base.binarized();
    }
  }
  return result;
}

Tensor sparse_dense_matmul(const SparseMatrix& a, const Tensor& x) {
  if (x.rank() != 2 || a.cols() != x.dim(0)) {
    throw ShapeError("sparse_dense_matmul mismatch: " +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " * " + shape_str(x.shape()));
  }
  const long n = a.rows(), f = x.dim(1);
  Tensor out = Tensor::zeros({n, f});
  {
    const double* px = x.data();
    double* po = out.mutable_data();
    const auto& offs = a.row_offsets();
    const auto& cols = a.col_indices();
    const auto& vals = a.values();
    for (long r = 0; r < n; ++r) {
      double* orow = po + r * f;
      for (long i = offs[r]; i < offs[r + 1]; ++i) {
        const double v = vals[i];
        const double* xrow = px + cols[i] * f;
        for (long j = 0; j < f; ++j) orow[j] += v * xrow[j];
      }
    }
  }
  if (Tape::active() && x.requires_grad()) {
    Tensor xv = x, ov = out;
    SparseMatrix at = a.transpose();
    out.set_requires_grad(true);
    Tape::active()->record([xv, ov, at, f]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      double* dx = xv.mutable_grad();
      const auto& offs = at.row_offsets();
      const auto& cols = at.col_indices();
      const auto& vals = at.values();
      for (long r = 0; r < at.rows(); ++r) {
        double* drow = dx + r * f;
        for (long i = offs[r]; i < offs[r + 1]; ++i) {
          const double v = vals[i];
          const double* grow = gy + cols[i] * f;
          for (long j = 0; j < f; ++j) drow[j] += v * grow[j];
        }
      }
    });
  }
  return out;
}

SparseMatrix normalized_laplacian(const SparseMatrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw std::invalid_argument("normalized_laplacian expects square input");
  }
  const long n = adjacency.rows();
  SparseMatrix hat = adjacency.plus(SparseMatrix::identity(n));
  std::vector<double> inv_sqrt_deg(n, 0.0);
  for (long r = 0; r < n; ++r) {
    double deg = 0.0;
    for (long i = hat.row_offsets()[r]; i < hat.row_offsets()[r + 1]; ++i) {
      deg += hat.values()[i];
    }
    inv_sqrt_deg[r] = 1.0 / std::sqrt(deg);
  }
  std::vector<Triplet> scaled;
  scaled.reserve(hat.nnz());
  for (long r = 0; r < n; ++r) {
    for (long i = hat.row_offsets()[r]; i < hat.row_offsets()[r + 1]; ++i) {
      const long c = hat.col_indices()[i];
      scaled.push_back(
          {r, c, inv_sqrt_deg[r] * hat.values()[i] * inv_sqrt_deg[c]});
    }
  }
  return SparseMatrix::from_triplets(n, n, std::move(scaled));
}

}  // namespace lanegcn
