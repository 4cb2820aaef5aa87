#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lanegcn {

// Thrown when operand dimensions violate an operation contract.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Shape = std::vector<long>;

long shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense fp64 tensor with row-major layout and an optional same-shape
// gradient buffer.
//
// Tensor is a shared handle: copies alias one storage block, which is what
// lets tape closures and the optimizer see the same buffers the layers hold.
// Values are treated as immutable once produced by an op; mutable_data() is
// reserved for initialization and optimizer updates between recorded steps.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);
  static Tensor matrix(const std::vector<std::vector<double>>& rows,
                       bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return storage_ != nullptr; }
  const Shape& shape() const;
  int rank() const;
  long dim(int axis) const;
  long size() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool flag);

  const double* data() const;
  double* mutable_data();

  // Null until some backward step touched this tensor.
  const double* grad_data() const;
  // Allocates a zero gradient buffer on first use.
  double* mutable_grad();
  bool has_grad() const;
  void zero_grad();

  double at(long flat_index) const;
  double at(long row, long col) const;

  // Deep copy of values; gradient state is not copied.
  Tensor clone() const;

 private:
  struct Storage {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> storage_;

  Storage& st();
  const Storage& st() const;
};

}  // namespace lanegcn
