#include "lanegcn/tensor.hpp"

#include <numeric>
#include <sstream>

namespace lanegcn {

long shape_size(const Shape& shape) {
  long n = 1;
  for (long d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out << "x";
    out << shape[i];
  }
  out << "]";
  return out.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
  for (long d : shape) {
    if (d < 0) throw ShapeError("negative extent in shape " + shape_str(shape));
  }
  if (shape_size(shape) != static_cast<long>(data.size())) {
    throw ShapeError("shape " + shape_str(shape) + " does not match " +
                     std::to_string(data.size()) + " elements");
  }
  storage_ = std::make_shared<Storage>();
  storage_->shape = std::move(shape);
  storage_->value = std::move(data);
  storage_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  long n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  long n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  long n = static_cast<long>(values.size());
  return Tensor({n}, std::move(values), requires_grad);
}

Tensor Tensor::matrix(const std::vector<std::vector<double>>& rows,
                      bool requires_grad) {
  long r = static_cast<long>(rows.size());
  long c = r > 0 ? static_cast<long>(rows[0].size()) : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (static_cast<long>(row.size()) != c) {
      throw ShapeError("ragged row in matrix literal");
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

Tensor::Storage& Tensor::st() {
  if (!storage_) throw std::logic_error("use of undefined Tensor");
  return *storage_;
}

const Tensor::Storage& Tensor::st() const {
  if (!storage_) throw std::logic_error("use of undefined Tensor");
  return *storage_;
}

const Shape& Tensor::shape() const { return st().shape; }

int Tensor::rank() const { return static_cast<int>(st().shape.size()); }

long Tensor::dim(int axis) const {
  const Shape& s = st().shape;
  if (axis < 0 || axis >= static_cast<int>(s.size())) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                     shape_str(s));
  }
  return s[axis];
}

long Tensor::size() const { return static_cast<long>(st().value.size()); }

bool Tensor::requires_grad() const { return st().requires_grad; }

Tensor& Tensor::set_requires_grad(bool flag) {
  st().requires_grad = flag;
  return *this;
}

const double* Tensor::data() const { return st().value.data(); }

double* Tensor::mutable_data() { return st().value.data(); }

const double* Tensor::grad_data() const {
  const Storage& s = st();
  return s.grad.empty() ? nullptr : s.grad.data();
}

double* Tensor::mutable_grad() {
  Storage& s = st();
  if (s.grad.empty()) s.grad.assign(s.value.size(), 0.0);
  return s.grad.data();
}

bool Tensor::has_grad() const { return !st().grad.empty(); }

void Tensor::zero_grad() {
  Storage& s = st();
  if (!s.grad.empty()) s.grad.assign(s.value.size(), 0.0);
}

double Tensor::at(long flat_index) const {
  const Storage& s = st();
  if (flat_index < 0 || flat_index >= static_cast<long>(s.value.size())) {
    throw std::out_of_range("tensor index " + std::to_string(flat_index) +
                            " out of range for " + shape_str(s.shape));
  }
  return s.value[flat_index];
}

double Tensor::at(long row, long col) const {
  const Storage& s = st();
  if (s.shape.size() != 2) {
    throw ShapeError("2-d access into tensor of shape " + shape_str(s.shape));
  }
  if (row < 0 || row >= s.shape[0] || col < 0 || col >= s.shape[1]) {
    throw std::out_of_range("index (" + std::to_string(row) + "," +
                            std::to_string(col) + ") out of range for " +
                            shape_str(s.shape));
  }
  return s.value[row * s.shape[1] + col];
}

Tensor Tensor::clone() const {
  const Storage& s = st();
  return Tensor(s.shape, s.value, s.requires_grad);
}

}  // namespace lanegcn
