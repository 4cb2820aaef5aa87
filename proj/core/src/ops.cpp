#include "lanegcn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lanegcn/tape.hpp"

namespace lanegcn {

namespace {

constexpr double kLayerNormEps = 1e-5;

bool wants_grad(std::initializer_list<const Tensor*> inputs) {
  if (!Tape::active()) return false;
  for (const Tensor* t : inputs) {
    if (t->defined() && t->requires_grad()) return true;
  }
  return false;
}

void record(Tensor& out, std::function<void()> step) {
  out.set_requires_grad(true);
  Tape::active()->record(std::move(step));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul shape mismatch: " + shape_str(a.shape()) + " * " +
                     shape_str(b.shape()));
  }
  const long m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out = Tensor::zeros({m, n});
  {
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.mutable_data();
    for (long i = 0; i < m; ++i) {
      for (long l = 0; l < k; ++l) {
        const double av = pa[i * k + l];
        if (av == 0.0) continue;
        const double* brow = pb + l * n;
        double* orow = po + i * n;
        for (long j = 0; j < n; ++j) orow[j] += av * brow[j];
      }
    }
  }
  if (wants_grad({&a, &b})) {
    Tensor av = a, bv = b, ov = out;
    record(out, [av, bv, ov, m, k, n]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      if (av.requires_grad()) {
        double* ga = av.mutable_grad();
        const double* pb = bv.data();
        for (long i = 0; i < m; ++i) {
          for (long l = 0; l < k; ++l) {
            double acc = 0.0;
            const double* gyrow = gy + i * n;
            const double* brow = pb + l * n;
            for (long j = 0; j < n; ++j) acc += gyrow[j] * brow[j];
            ga[i * k + l] += acc;
          }
        }
      }
      if (bv.requires_grad()) {
        double* gb = bv.mutable_grad();
        const double* pa = av.data();
        for (long i = 0; i < m; ++i) {
          const double* gyrow = gy + i * n;
          for (long l = 0; l < k; ++l) {
            const double avv = pa[i * k + l];
            if (avv == 0.0) continue;
            double* gbrow = gb + l * n;
            for (long j = 0; j < n; ++j) gbrow[j] += avv * gyrow[j];
          }
        }
      }
    });
  }
  return out;
}

Tensor conv1d(const Tensor& x, const Tensor& kernel, int stride, int padding) {
  if (x.rank() != 2 || kernel.rank() != 3 || kernel.dim(1) != x.dim(0)) {
    throw ShapeError("conv1d shape mismatch: x " + shape_str(x.shape()) +
                     ", kernel " + shape_str(kernel.shape()));
  }
  if (stride != 1 && stride != 2) {
    throw std::invalid_argument("conv1d stride must be 1 or 2, got " +
                                std::to_string(stride));
  }
  if (padding < 0) throw std::invalid_argument("conv1d padding must be >= 0");
  const long c_in = x.dim(0), t = x.dim(1);
  const long c_out = kernel.dim(0), w = kernel.dim(2);
  const long t_out = (t + 2 * padding - w) / stride + 1;
  if (t + 2 * padding < w || t_out < 1) {
    throw ShapeError("conv1d produces empty output for input length " +
                     std::to_string(t) + ", kernel width " + std::to_string(w) +
                     ", stride " + std::to_string(stride) + ", padding " +
                     std::to_string(padding));
  }
  Tensor out = Tensor::zeros({c_out, t_out});
  {
    const double* px = x.data();
    const double* pk = kernel.data();
    double* po = out.mutable_data();
    for (long o = 0; o < c_out; ++o) {
      for (long j = 0; j < t_out; ++j) {
        double acc = 0.0;
        for (long ci = 0; ci < c_in; ++ci) {
          const double* krow = pk + (o * c_in + ci) * w;
          const double* xrow = px + ci * t;
          const long base = j * stride - padding;
          for (long u = 0; u < w; ++u) {
            const long pos = base + u;
            if (pos >= 0 && pos < t) acc += krow[u] * xrow[pos];
          }
        }
        po[o * t_out + j] = acc;
      }
    }
  }
  if (wants_grad({&x, &kernel})) {
    Tensor xv = x, kv = kernel, ov = out;
    const long s = stride, p = padding;
    record(out, [xv, kv, ov, c_in, c_out, t, t_out, w, s, p]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      const bool gx = xv.requires_grad();
      const bool gk = kv.requires_grad();
      double* dx = gx ? xv.mutable_grad() : nullptr;
      double* dk = gk ? kv.mutable_grad() : nullptr;
      const double* px = xv.data();
      const double* pk = kv.data();
      for (long o = 0; o < c_out; ++o) {
        for (long j = 0; j < t_out; ++j) {
          const double g = gy[o * t_out + j];
          if (g == 0.0) continue;
          const long base = j * s - p;
          for (long ci = 0; ci < c_in; ++ci) {
            for (long u = 0; u < w; ++u) {
              const long pos = base + u;
              if (pos < 0 || pos >= t) continue;
              if (gx) dx[ci * t + pos] += g * pk[(o * c_in + ci) * w + u];
              if (gk) dk[(o * c_in + ci) * w + u] += g * px[ci * t + pos];
            }
          }
        }
      }
    });
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias) {
  if (x.rank() < 1) throw ShapeError("layer_norm needs rank >= 1");
  const long f = x.dim(x.rank() - 1);
  if (gain.rank() != 1 || bias.rank() != 1 || gain.size() != f ||
      bias.size() != f) {
    throw ShapeError("layer_norm gain/bias must be rank-1 of size " +
                     std::to_string(f));
  }
  const long rows = f > 0 ? x.size() / f : 0;
  Tensor out = Tensor::zeros(x.shape());
  // Saved per-row: normalized values and 1/std, both needed by backward.
  std::vector<double> normed(x.size());
  std::vector<double> inv_std(rows);
  {
    const double* px = x.data();
    const double* pg = gain.data();
    const double* pb = bias.data();
    double* po = out.mutable_data();
    for (long r = 0; r < rows; ++r) {
      const double* xr = px + r * f;
      double mu = 0.0;
      for (long i = 0; i < f; ++i) mu += xr[i];
      mu /= f;
      double var = 0.0;
      for (long i = 0; i < f; ++i) {
        const double d = xr[i] - mu;
        var += d * d;
      }
      var /= f;
      const double is = 1.0 / std::sqrt(var + kLayerNormEps);
      inv_std[r] = is;
      for (long i = 0; i < f; ++i) {
        const double h = (xr[i] - mu) * is;
        normed[r * f + i] = h;
        po[r * f + i] = h * pg[i] + pb[i];
      }
    }
  }
  if (wants_grad({&x, &gain, &bias})) {
    Tensor xv = x, gv = gain, bv = bias, ov = out;
    record(out, [xv, gv, bv, ov, rows, f, normed = std::move(normed),
                 inv_std = std::move(inv_std)]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      const double* pg = gv.data();
      double* dx = xv.requires_grad() ? xv.mutable_grad() : nullptr;
      double* dg = gv.requires_grad() ? gv.mutable_grad() : nullptr;
      double* db = bv.requires_grad() ? bv.mutable_grad() : nullptr;
      for (long r = 0; r < rows; ++r) {
        const double* gyr = gy + r * f;
        const double* hr = normed.data() + r * f;
        if (dg || db) {
          for (long i = 0; i < f; ++i) {
            if (dg) dg[i] += gyr[i] * hr[i];
            if (db) db[i] += gyr[i];
          }
        }
        if (dx) {
          double m1 = 0.0, m2 = 0.0;
          for (long i = 0; i < f; ++i) {
            const double gh = gyr[i] * pg[i];
            m1 += gh;
            m2 += gh * hr[i];
          }
          m1 /= f;
          m2 /= f;
          const double is = inv_std[r];
          double* dxr = dx + r * f;
          for (long i = 0; i < f; ++i) {
            const double gh = gyr[i] * pg[i];
            dxr[i] += (gh - m1 - hr[i] * m2) * is;
          }
        }
      }
    });
  }
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape());
  const double* px = x.data();
  double* po = out.mutable_data();
  const long n = x.size();
  for (long i = 0; i < n; ++i) po[i] = px[i] > 0.0 ? px[i] : 0.0;
  if (wants_grad({&x})) {
    Tensor xv = x, ov = out;
    record(out, [xv, ov, n]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      double* dx = xv.mutable_grad();
      const double* px = xv.data();
      for (long i = 0; i < n; ++i) {
        if (px[i] > 0.0) dx[i] += gy[i];
      }
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  const bool same = a.shape() == b.shape();
  const bool row_broadcast = !same && b.rank() == 1 && a.rank() >= 1 &&
                             a.dim(a.rank() - 1) == b.size();
  if (!same && !row_broadcast) {
    throw ShapeError("add shape mismatch: " + shape_str(a.shape()) + " + " +
                     shape_str(b.shape()));
  }
  Tensor out = Tensor::zeros(a.shape());
  const long n = a.size();
  const long f = row_broadcast ? b.size() : n;
  {
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.mutable_data();
    if (same) {
      for (long i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
    } else {
      for (long i = 0; i < n; ++i) po[i] = pa[i] + pb[i % f];
    }
  }
  if (wants_grad({&a, &b})) {
    Tensor av = a, bv = b, ov = out;
    record(out, [av, bv, ov, n, f, same]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      if (av.requires_grad()) {
        double* da = av.mutable_grad();
        for (long i = 0; i < n; ++i) da[i] += gy[i];
      }
      if (bv.requires_grad()) {
        double* db = bv.mutable_grad();
        if (same) {
          for (long i = 0; i < n; ++i) db[i] += gy[i];
        } else {
          for (long i = 0; i < n; ++i) db[i % f] += gy[i];
        }
      }
    });
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("sub shape mismatch: " + shape_str(a.shape()) + " - " +
                     shape_str(b.shape()));
  }
  Tensor out = Tensor::zeros(a.shape());
  const long n = a.size();
  {
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.mutable_data();
    for (long i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
  }
  if (wants_grad({&a, &b})) {
    Tensor av = a, bv = b, ov = out;
    record(out, [av, bv, ov, n]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      if (av.requires_grad()) {
        double* da = av.mutable_grad();
        for (long i = 0; i < n; ++i) da[i] += gy[i];
      }
      if (bv.requires_grad()) {
        double* db = bv.mutable_grad();
        for (long i = 0; i < n; ++i) db[i] -= gy[i];
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& x, double factor) {
  Tensor out = Tensor::zeros(x.shape());
  const long n = x.size();
  const double* px = x.data();
  double* po = out.mutable_data();
  for (long i = 0; i < n; ++i) po[i] = px[i] * factor;
  if (wants_grad({&x})) {
    Tensor xv = x, ov = out;
    record(out, [xv, ov, n, factor]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      double* dx = xv.mutable_grad();
      for (long i = 0; i < n; ++i) dx[i] += gy[i] * factor;
    });
  }
  return out;
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat of zero parts");
  const int rank = parts[0].rank();
  if (axis < 0 || axis >= rank) {
    throw ShapeError("concat axis " + std::to_string(axis) +
                     " out of range for rank " + std::to_string(rank));
  }
  Shape out_shape = parts[0].shape();
  long axis_total = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != rank) throw ShapeError("concat rank mismatch");
    for (int d = 0; d < rank; ++d) {
      if (d != axis && p.dim(d) != out_shape[d]) {
        throw ShapeError("concat extent mismatch at axis " + std::to_string(d) +
                         ": " + shape_str(p.shape()) + " vs " +
                         shape_str(out_shape));
      }
    }
    axis_total += p.dim(axis);
  }
  out_shape[axis] = axis_total;
  Tensor out = Tensor::zeros(out_shape);

  long outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= out_shape[d];
  for (int d = axis + 1; d < rank; ++d) inner *= out_shape[d];

  {
    double* po = out.mutable_data();
    long offset = 0;
    for (const Tensor& p : parts) {
      const long ext = p.dim(axis);
      const double* pp = p.data();
      for (long a = 0; a < outer; ++a) {
        std::copy(pp + a * ext * inner, pp + (a + 1) * ext * inner,
                  po + (a * axis_total + offset) * inner);
      }
      offset += ext;
    }
  }

  bool any_grad = false;
  for (const Tensor& p : parts) any_grad |= p.requires_grad();
  if (Tape::active() && any_grad) {
    std::vector<Tensor> saved = parts;
    std::vector<long> extents;
    extents.reserve(parts.size());
    for (const Tensor& p : parts) extents.push_back(p.dim(axis));
    Tensor ov = out;
    record(out, [saved = std::move(saved), extents = std::move(extents), ov,
                 outer, inner, axis_total]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      long offset = 0;
      for (size_t pi = 0; pi < saved.size(); ++pi) {
        const long ext = extents[pi];
        Tensor& p = saved[pi];
        if (p.requires_grad()) {
          double* dp = p.mutable_grad();
          for (long a = 0; a < outer; ++a) {
            const double* src = gy + (a * axis_total + offset) * inner;
            double* dst = dp + a * ext * inner;
            for (long i = 0; i < ext * inner; ++i) dst[i] += src[i];
          }
        }
        offset += ext;
      }
    });
  }
  return out;
}

Tensor index_select(const Tensor& x, const std::vector<long>& indices) {
  if (x.rank() < 1) throw ShapeError("index_select needs rank >= 1");
  const long rows = x.dim(0);
  const long inner = rows > 0 ? x.size() / rows : 0;
  for (long idx : indices) {
    if (idx < 0 || idx >= rows) {
      throw std::out_of_range("index_select index " + std::to_string(idx) +
                              " out of range [0," + std::to_string(rows) + ")");
    }
  }
  Shape out_shape = x.shape();
  out_shape[0] = static_cast<long>(indices.size());
  Tensor out = Tensor::zeros(out_shape);
  {
    const double* px = x.data();
    double* po = out.mutable_data();
    for (size_t r = 0; r < indices.size(); ++r) {
      std::copy(px + indices[r] * inner, px + (indices[r] + 1) * inner,
                po + static_cast<long>(r) * inner);
    }
  }
  if (wants_grad({&x})) {
    Tensor xv = x, ov = out;
    record(out, [xv, ov, indices, inner]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      double* dx = xv.mutable_grad();
      for (size_t r = 0; r < indices.size(); ++r) {
        const double* src = gy + static_cast<long>(r) * inner;
        double* dst = dx + indices[r] * inner;
        for (long i = 0; i < inner; ++i) dst[i] += src[i];
      }
    });
  }
  return out;
}

Tensor scatter_add(const Tensor& x, const std::vector<long>& indices,
                   long out_rows) {
  if (x.rank() < 1) throw ShapeError("scatter_add needs rank >= 1");
  const long rows = x.dim(0);
  if (static_cast<long>(indices.size()) != rows) {
    throw ShapeError("scatter_add expects one index per row: " +
                     std::to_string(indices.size()) + " indices for " +
                     std::to_string(rows) + " rows");
  }
  for (long idx : indices) {
    if (idx < 0 || idx >= out_rows) {
      throw std::out_of_range("scatter_add index " + std::to_string(idx) +
                              " out of range [0," + std::to_string(out_rows) +
                              ")");
    }
  }
  const long inner = rows > 0 ? x.size() / rows : 0;
  Shape out_shape = x.shape();
  out_shape[0] = out_rows;
  Tensor out = Tensor::zeros(out_shape);
  {
    const double* px = x.data();
    double* po = out.mutable_data();
    for (long r = 0; r < rows; ++r) {
      const double* src = px + r * inner;
      double* dst = po + indices[r] * inner;
      for (long i = 0; i < inner; ++i) dst[i] += src[i];
    }
  }
  if (wants_grad({&x})) {
    Tensor xv = x, ov = out;
    record(out, [xv, ov, indices, inner, rows]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      double* dx = xv.mutable_grad();
      for (long r = 0; r < rows; ++r) {
        const double* src = gy + indices[r] * inner;
        double* dst = dx + r * inner;
        for (long i = 0; i < inner; ++i) dst[i] += src[i];
      }
    });
  }
  return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw ShapeError("reshape " + shape_str(x.shape()) + " -> " +
                     shape_str(shape) + " changes element count");
  }
  Tensor out(shape, std::vector<double>(x.data(), x.data() + x.size()));
  if (wants_grad({&x})) {
    Tensor xv = x, ov = out;
    const long n = x.size();
    record(out, [xv, ov, n]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      double* dx = xv.mutable_grad();
      for (long i = 0; i < n; ++i) dx[i] += gy[i];
    });
  }
  return out;
}

Tensor transpose(const Tensor& x) {
  if (x.rank() != 2) {
    throw ShapeError("transpose expects rank 2, got " + shape_str(x.shape()));
  }
  const long r = x.dim(0), c = x.dim(1);
  Tensor out = Tensor::zeros({c, r});
  {
    const double* px = x.data();
    double* po = out.mutable_data();
    for (long i = 0; i < r; ++i) {
      for (long j = 0; j < c; ++j) po[j * r + i] = px[i * c + j];
    }
  }
  if (wants_grad({&x})) {
    Tensor xv = x, ov = out;
    record(out, [xv, ov, r, c]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      double* dx = xv.mutable_grad();
      for (long i = 0; i < r; ++i) {
        for (long j = 0; j < c; ++j) dx[i * c + j] += gy[j * r + i];
      }
    });
  }
  return out;
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  const double* px = x.data();
  const long n = x.size();
  for (long i = 0; i < n; ++i) acc += px[i];
  Tensor out = Tensor::scalar(acc);
  if (wants_grad({&x})) {
    Tensor xv = x, ov = out;
    record(out, [xv, ov, n]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      double* dx = xv.mutable_grad();
      for (long i = 0; i < n; ++i) dx[i] += gy[0];
    });
  }
  return out;
}

Tensor mean(const Tensor& x) {
  if (x.size() == 0) throw ShapeError("mean of empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor upsample_linear(const Tensor& x, long out_len) {
  if (x.rank() != 2) {
    throw ShapeError("upsample_linear expects [channels x time], got " +
                     shape_str(x.shape()));
  }
  if (out_len < 1) throw ShapeError("upsample_linear needs out_len >= 1");
  const long c = x.dim(0), t = x.dim(1);
  if (t < 1) throw ShapeError("upsample_linear needs input length >= 1");

  std::vector<long> lo(out_len), hi(out_len);
  std::vector<double> w_hi(out_len);
  for (long j = 0; j < out_len; ++j) {
    if (t == 1 || out_len == 1) {
      lo[j] = hi[j] = (out_len == 1) ? t - 1 : 0;
      w_hi[j] = 0.0;
      continue;
    }
    const double src = static_cast<double>(j) * (t - 1) / (out_len - 1);
    lo[j] = static_cast<long>(src);
    hi[j] = std::min(lo[j] + 1, t - 1);
    w_hi[j] = src - static_cast<double>(lo[j]);
  }

  Tensor out = Tensor::zeros({c, out_len});
  {
    const double* px = x.data();
    double* po = out.mutable_data();
    for (long ch = 0; ch < c; ++ch) {
      const double* xr = px + ch * t;
      double* orow = po + ch * out_len;
      for (long j = 0; j < out_len; ++j) {
        orow[j] = (1.0 - w_hi[j]) * xr[lo[j]] + w_hi[j] * xr[hi[j]];
      }
    }
  }
  if (wants_grad({&x})) {
    Tensor xv = x, ov = out;
    record(out, [xv, ov, c, t, out_len, lo = std::move(lo), hi = std::move(hi),
                 w_hi = std::move(w_hi)]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      double* dx = xv.mutable_grad();
      for (long ch = 0; ch < c; ++ch) {
        const double* gyr = gy + ch * out_len;
        double* dxr = dx + ch * t;
        for (long j = 0; j < out_len; ++j) {
          dxr[lo[j]] += (1.0 - w_hi[j]) * gyr[j];
          dxr[hi[j]] += w_hi[j] * gyr[j];
        }
      }
    });
  }
  return out;
}

}  // namespace lanegcn
