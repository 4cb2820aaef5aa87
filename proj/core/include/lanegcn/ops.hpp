#pragma once

#include <vector>

#include "lanegcn/tensor.hpp"

namespace lanegcn {

// Differentiable dense operations. Every op validates its operand shapes,
// computes the forward value, and — when a tape is recording and an input
// requires gradients — registers a backward step that accumulates into the
// inputs' gradient buffers.

// [m x k] * [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b);

// Cross-correlation of x [c_in x t] with kernel [c_out x c_in x w] under
// zero padding. stride must be 1 or 2; the output length
// floor((t + 2*padding - w) / stride) + 1 must be >= 1.
Tensor conv1d(const Tensor& x, const Tensor& kernel, int stride, int padding);

// Per-row normalization over the trailing feature axis:
// (x - mean) / sqrt(var + 1e-5) * gain + bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias);

Tensor relu(const Tensor& x);

// Elementwise when shapes match; if b is rank-1 with b.size == a's trailing
// extent, b broadcasts across rows (bias add).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

// Concatenates along `axis`; all parts must agree on every other extent.
Tensor concat(const std::vector<Tensor>& parts, int axis);

// Row gather / scatter along axis 0. scatter_add sums rows that share a
// target index; its backward is an index_select of the output gradient.
Tensor index_select(const Tensor& x, const std::vector<long>& indices);
Tensor scatter_add(const Tensor& x, const std::vector<long>& indices,
                   long out_rows);

// Same data, new shape (element count must match).
Tensor reshape(const Tensor& x, Shape shape);

// 2-d transpose.
Tensor transpose(const Tensor& x);

// Full reduction to a scalar of shape [1].
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Linear interpolation of x [c x t] to [c x out_len] with both endpoints
// aligned, so the latest time step maps onto the latest output column.
Tensor upsample_linear(const Tensor& x, long out_len);

}  // namespace lanegcn
