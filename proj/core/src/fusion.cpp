#include "lanegcn/fusion.hpp"

#include "lanegcn/ops.hpp"

namespace lanegcn {

AttentionWeights::AttentionWeights(ParameterStore& store,
                                   const std::string& name, long channels)
    : pair_norm(store, name + ".pair_norm", channels),
      delta_mlp(store, name + ".delta", 2, channels) {
  w_self = store.create(name + ".w_self", {channels, channels},
                        Init::kUniformFanIn);
  w_pair = store.create(name + ".w_pair", {3 * channels, channels},
                        Init::kUniformFanIn);
  w_out =
      store.create(name + ".w_out", {channels, channels}, Init::kUniformFanIn);
}

Tensor attention_aggregate(const Tensor& queries,
                           const std::vector<Vec2>& query_locs,
                           const Tensor& keys,
                           const std::vector<Vec2>& key_locs,
                           const std::vector<std::pair<long, long>>& pairs,
                           const AttentionWeights& w) {
  if (queries.dim(0) != static_cast<long>(query_locs.size()) ||
      keys.dim(0) != static_cast<long>(key_locs.size())) {
    throw ShapeError("attention features and locations disagree");
  }
  Tensor y = matmul(queries, w.w_self);
  if (pairs.empty()) return y;

  std::vector<long> qi, kj;
  qi.reserve(pairs.size());
  kj.reserve(pairs.size());
  Tensor offsets = Tensor::zeros({static_cast<long>(pairs.size()), 2});
  double* po = offsets.mutable_data();
  for (size_t p = 0; p < pairs.size(); ++p) {
    qi.push_back(pairs[p].first);
    kj.push_back(pairs[p].second);
    const Vec2 d = key_locs[pairs[p].second] - query_locs[pairs[p].first];
    po[2 * p] = d.x;
    po[2 * p + 1] = d.y;
  }
  Tensor q_rows = index_select(queries, qi);
  Tensor k_rows = index_select(keys, kj);
  Tensor delta = w.delta_mlp.forward(offsets);
  Tensor joint = concat({q_rows, delta, k_rows}, 1);
  Tensor h = relu(w.pair_norm.forward(matmul(joint, w.w_pair)));
  Tensor contrib = scatter_add(matmul(h, w.w_out), qi, queries.dim(0));
  return add(y, contrib);
}

Tensor attention_aggregate(const Tensor& queries,
                           const std::vector<Vec2>& query_locs,
                           const Tensor& keys,
                           const std::vector<Vec2>& key_locs, double radius,
                           const AttentionWeights& w) {
  return attention_aggregate(queries, query_locs, keys, key_locs,
                             context_pairs(query_locs, key_locs, radius), w);
}

AttentionBlock::AttentionBlock(ParameterStore& store, const std::string& name,
                               long channels)
    : att_(store, name + ".att", channels),
      norm1_(store, name + ".norm1", channels),
      linear_(store, name + ".linear", channels, channels, /*with_bias=*/false),
      norm2_(store, name + ".norm2", channels) {}

Tensor AttentionBlock::forward(
    const Tensor& queries, const std::vector<Vec2>& query_locs,
    const Tensor& keys, const std::vector<Vec2>& key_locs,
    const std::vector<std::pair<long, long>>& pairs) const {
  Tensor h =
      attention_aggregate(queries, query_locs, keys, key_locs, pairs, att_);
  h = relu(norm1_.forward(h));
  h = norm2_.forward(linear_.forward(h));
  return relu(add(h, queries));
}

FusionNet::FusionNet(ParameterStore& store, const std::string& name,
                     const FusionConfig& cfg)
    : cfg_(cfg) {
  for (int b = 0; b < cfg.blocks_per_stage; ++b) {
    if (cfg.a2l) {
      a2l_.emplace_back(store, name + ".a2l" + std::to_string(b),
                        cfg.channels);
    }
    if (cfg.l2a) {
      l2a_.emplace_back(store, name + ".l2a" + std::to_string(b),
                        cfg.channels);
    }
    if (cfg.a2a) {
      a2a_.emplace_back(store, name + ".a2a" + std::to_string(b),
                        cfg.channels);
    }
  }
  if (cfg.l2l) {
    MapNetConfig l2l_cfg = cfg.l2l_cfg;
    l2l_cfg.channels = cfg.channels;
    l2l_.emplace(store, name + ".l2l", l2l_cfg);
  }
}

FusionNet::Result FusionNet::forward(
    const Tensor& actor_feats, const std::vector<Vec2>& actor_locs,
    const std::vector<long>& actor_groups, const Tensor& lane_feats,
    const std::vector<Vec2>& node_locs, const std::vector<long>& node_groups,
    const LaneGraph& graph) const {
  Tensor actors = actor_feats;
  Tensor lanes = lane_feats;
  const bool have_lanes = lanes.defined() && lanes.dim(0) > 0;
  const bool have_actors = actors.dim(0) > 0;

  if (!a2l_.empty() && have_lanes && have_actors) {
    const auto pairs = context_pairs_grouped(node_locs, node_groups,
                                             actor_locs, actor_groups,
                                             cfg_.a2l_radius);
    for (const AttentionBlock& block : a2l_) {
      lanes = block.forward(lanes, node_locs, actors, actor_locs, pairs);
    }
  }
  if (l2l_ && have_lanes) {
    lanes = l2l_->forward(lanes, graph);
  }
  if (!l2a_.empty() && have_lanes && have_actors) {
    const auto pairs = context_pairs_grouped(actor_locs, actor_groups,
                                             node_locs, node_groups,
                                             cfg_.l2a_radius);
    for (const AttentionBlock& block : l2a_) {
      actors = block.forward(actors, actor_locs, lanes, node_locs, pairs);
    }
  }
  if (!a2a_.empty() && have_actors) {
    const auto pairs = context_pairs_grouped(actor_locs, actor_groups,
                                             actor_locs, actor_groups,
                                             cfg_.a2a_radius);
    for (const AttentionBlock& block : a2a_) {
      actors = block.forward(actors, actor_locs, actors, actor_locs, pairs);
    }
  }
  return {actors, lanes};
}

}  // namespace lanegcn
