#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lanegcn/lane_graph.hpp"
#include "lanegcn/map_net.hpp"
#include "lanegcn/nn.hpp"

namespace lanegcn {

// Distance-gated attention aggregation:
//   y_i = x_i W_self + sum_j phi(concat(x_i, delta_ij, x_j) W_pair) W_out
// over context pairs (i, j), with delta_ij an embedding of the location
// offset v_j - v_i and phi a layer norm followed by ReLU. The sum is
// unnormalized; queries with no context reduce to x_i W_self.
struct AttentionWeights {
  Tensor w_self;       // [C x C]
  Tensor w_pair;       // [3C x C]
  LayerNorm pair_norm;
  Tensor w_out;        // [C x C]
  EmbedMlp delta_mlp;  // 2 -> C

  AttentionWeights() = default;
  AttentionWeights(ParameterStore& store, const std::string& name,
                   long channels);
};

Tensor attention_aggregate(const Tensor& queries,
                           const std::vector<Vec2>& query_locs,
                           const Tensor& keys,
                           const std::vector<Vec2>& key_locs,
                           const std::vector<std::pair<long, long>>& pairs,
                           const AttentionWeights& w);

// Convenience overload: context pairs from a strict radius query.
Tensor attention_aggregate(const Tensor& queries,
                           const std::vector<Vec2>& query_locs,
                           const Tensor& keys,
                           const std::vector<Vec2>& key_locs, double radius,
                           const AttentionWeights& w);

// Attention followed by a linear layer and a shortcut, norm + ReLU after
// each, mirroring the lane convolution residual block.
class AttentionBlock {
 public:
  AttentionBlock() = default;
  AttentionBlock(ParameterStore& store, const std::string& name,
                 long channels);

  Tensor forward(const Tensor& queries, const std::vector<Vec2>& query_locs,
                 const Tensor& keys, const std::vector<Vec2>& key_locs,
                 const std::vector<std::pair<long, long>>& pairs) const;

  const AttentionWeights& weights() const { return att_; }

 private:
  AttentionWeights att_;
  LayerNorm norm1_;
  Linear linear_;
  LayerNorm norm2_;
};

struct FusionConfig {
  long channels = 128;
  double a2l_radius = 7.0;
  double l2a_radius = 6.0;
  double a2a_radius = 100.0;
  bool a2l = true;
  bool l2l = true;
  bool l2a = true;
  bool a2a = true;
  int blocks_per_stage = 2;
  MapNetConfig l2l_cfg;  // lane-to-lane stage is a full lane-graph stack
};

// Interaction stack in the fixed order actors-to-lanes, lanes-to-lanes,
// lanes-to-actors, actors-to-actors. Group labels keep scenes of a batch
// from exchanging context.
class FusionNet {
 public:
  FusionNet(ParameterStore& store, const std::string& name,
            const FusionConfig& cfg);

  struct Result {
    Tensor actor_feats;
    Tensor lane_feats;
  };

  Result forward(const Tensor& actor_feats,
                 const std::vector<Vec2>& actor_locs,
                 const std::vector<long>& actor_groups,
                 const Tensor& lane_feats, const std::vector<Vec2>& node_locs,
                 const std::vector<long>& node_groups,
                 const LaneGraph& graph) const;

  const FusionConfig& config() const { return cfg_; }

 private:
  FusionConfig cfg_;
  std::vector<AttentionBlock> a2l_;
  std::optional<LaneGcn> l2l_;
  std::vector<AttentionBlock> l2a_;
  std::vector<AttentionBlock> a2a_;
};

}  // namespace lanegcn
