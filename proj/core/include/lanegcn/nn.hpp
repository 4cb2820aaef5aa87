#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lanegcn/ops.hpp"
#include "lanegcn/tensor.hpp"

namespace lanegcn {

enum class Init { kZero, kOne, kUniformFanIn };

// Owns every learnable tensor of a model, keyed by a unique path-style name.
// Creation order is deterministic, so a fixed seed reproduces the exact same
// initialization.
class ParameterStore {
 public:
  explicit ParameterStore(uint64_t seed) : rng_(seed) {}

  Tensor create(const std::string& name, Shape shape, Init init,
                long fan_in = 0);

  bool has(const std::string& name) const;
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;

  const std::vector<std::pair<std::string, Tensor>>& entries() const {
    return entries_;
  }
  std::size_t count() const { return entries_.size(); }
  long total_size() const;

  void zero_grad();
  void set_trainable(bool trainable);

 private:
  std::mt19937_64 rng_;
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Linear {
  Tensor weight;  // [in x out]
  Tensor bias;    // undefined when constructed without bias

  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, long in, long out,
         bool with_bias = true);

  Tensor forward(const Tensor& x) const;
};

struct LayerNorm {
  Tensor gain;  // [f]
  Tensor bias;  // [f]

  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& name, long features);

  Tensor forward(const Tensor& x) const { return layer_norm(x, gain, bias); }
};

// linear -> norm -> relu -> linear
struct Mlp {
  Linear first;
  LayerNorm norm;
  Linear second;

  Mlp() = default;
  Mlp(ParameterStore& store, const std::string& name, long in, long hidden,
      long out);

  Tensor forward(const Tensor& x) const;
};

// linear -> norm -> relu, used for coordinate-offset embeddings
struct EmbedMlp {
  Linear lin;
  LayerNorm norm;

  EmbedMlp() = default;
  EmbedMlp(ParameterStore& store, const std::string& name, long in, long out);

  Tensor forward(const Tensor& x) const;
};

// Dense residual block:
//   relu(norm2(lin2(relu(norm1(lin1(x))))) + shortcut(x))
// with an identity shortcut when in == out and a projection otherwise.
struct LinearRes {
  Linear lin1;
  LayerNorm norm1;
  Linear lin2;
  LayerNorm norm2;
  std::optional<Linear> proj;
  std::optional<LayerNorm> proj_norm;

  LinearRes() = default;
  LinearRes(ParameterStore& store, const std::string& name, long in, long out);

  Tensor forward(const Tensor& x) const;
};

// Normalizes a [channels x time] map over the channel axis at each time
// step (transpose, per-row norm, transpose back).
Tensor channel_norm(const Tensor& x, const LayerNorm& norm);

// 1D convolutional residual block on [c_in x t]:
//   conv(stride) -> norm -> relu -> conv(1) -> norm, plus a shortcut
//   (identity, or 1x1 conv + norm when shape changes), then relu.
struct Res1d {
  Tensor kernel1;  // [c_out x c_in x 3]
  LayerNorm norm1;
  Tensor kernel2;  // [c_out x c_out x 3]
  LayerNorm norm2;
  std::optional<Tensor> proj_kernel;  // [c_out x c_in x 1]
  std::optional<LayerNorm> proj_norm;
  int stride = 1;

  Res1d() = default;
  Res1d(ParameterStore& store, const std::string& name, long c_in, long c_out,
        int stride);

  Tensor forward(const Tensor& x) const;
};

}  // namespace lanegcn
