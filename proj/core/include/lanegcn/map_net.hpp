#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lanegcn/lane_graph.hpp"
#include "lanegcn/nn.hpp"

namespace lanegcn {

// Weight sets for the lane graph operators. All matrices are C x C.

struct LaneConvWeights {
  Tensor w_self;
  Tensor w_pre, w_suc, w_left, w_right;
};

struct DilatedConvWeights {
  Tensor w_self;
  Tensor w_pre, w_suc;
};

struct MultiScaleWeights {
  Tensor w_self;
  Tensor w_left, w_right;
  std::vector<int> dilations;
  std::vector<Tensor> w_pre, w_suc;  // one per dilation
};

// Y = X W_self + sum over connection types of A_i X W_i.
Tensor laneconv(const Tensor& x, const LaneGraph& g, const LaneConvWeights& w);

// Y = X W_self + A_pre^k X W_pre + A_suc^k X W_suc, binarized powers.
Tensor dilated_laneconv(const Tensor& x, const LaneGraph& g, int k,
                        const DilatedConvWeights& w);

// Self and left/right terms at step 1 plus pre/suc terms at every dilation.
Tensor multiscale_laneconv(const Tensor& x, const LaneGraph& g,
                           const MultiScaleWeights& w);

// Vanilla normalized graph convolution Y = L X W.
Tensor graphconv(const Tensor& x, const SparseMatrix& laplacian,
                 const Tensor& w);

struct MapNetConfig {
  long channels = 128;
  std::vector<int> dilations = {1, 2, 4, 8, 16, 32};
  int blocks = 4;
  // Operator variants, used by the ablation axes. With multi_type off the
  // four typed adjacencies collapse into the symmetrized union; with
  // dilated off only step 1 is used; graphconv_baseline swaps the whole
  // operator for the normalized-Laplacian convolution.
  bool multi_type = true;
  bool dilated = true;
  bool residual = true;
  bool graphconv_baseline = false;

  std::vector<int> effective_dilations() const {
    return dilated ? dilations : std::vector<int>{1};
  }
};

// Input feature of each lane node: an MLP of the segment extent plus an
// MLP of the segment midpoint.
class NodeFeatureEncoder {
 public:
  NodeFeatureEncoder(ParameterStore& store, const std::string& name,
                     long channels);
  Tensor forward(const LaneGraph& g) const;

 private:
  Mlp shape_mlp_;
  Mlp loc_mlp_;
};

Tensor node_features(const LaneGraph& g, const NodeFeatureEncoder& encoder);

// Stack of lane-graph convolution blocks over a fixed channel width.
// Used for the map backbone and for the lane-to-lane fusion stage.
class LaneGcn {
 public:
  LaneGcn(ParameterStore& store, const std::string& name,
          const MapNetConfig& cfg);

  Tensor forward(const Tensor& x, const LaneGraph& g) const;

  const MapNetConfig& config() const { return cfg_; }

 private:
  struct Block {
    MultiScaleWeights typed;          // multi-type operator
    std::vector<Tensor> w_union;      // single-adjacency operator
    Tensor w_self_union;
    Tensor w_graph;                   // graphconv baseline
    LayerNorm norm1;
    std::optional<Linear> linear;     // residual variant only
    std::optional<LayerNorm> norm2;
  };

  Tensor block_op(const Block& b, const Tensor& x, const LaneGraph& g,
                  const SparseMatrix* laplacian,
                  const std::vector<SparseMatrix>* union_powers) const;

  MapNetConfig cfg_;
  std::vector<Block> blocks_;
};

}  // namespace lanegcn
