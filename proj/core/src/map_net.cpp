#include "lanegcn/map_net.hpp"

#include "lanegcn/ops.hpp"

namespace lanegcn {

namespace {

// A_i X W_i, skipped entirely for empty adjacencies (a zero term adds no
// value and no gradient).
void add_term(Tensor& acc, const SparseMatrix& a, const Tensor& x,
              const Tensor& w) {
  if (a.nnz() == 0) return;
  acc = add(acc, matmul(sparse_dense_matmul(a, x), w));
}

}  // namespace

Tensor laneconv(const Tensor& x, const LaneGraph& g, const LaneConvWeights& w) {
  if (x.rank() != 2 || x.dim(0) != g.num_nodes()) {
    throw ShapeError("laneconv features " + shape_str(x.shape()) +
                     " do not match " + std::to_string(g.num_nodes()) +
                     " lane nodes");
  }
  Tensor y = matmul(x, w.w_self);
  add_term(y, g.adj(AdjType::kPre), x, w.w_pre);
  add_term(y, g.adj(AdjType::kSuc), x, w.w_suc);
  add_term(y, g.adj(AdjType::kLeft), x, w.w_left);
  add_term(y, g.adj(AdjType::kRight), x, w.w_right);
  return y;
}

Tensor dilated_laneconv(const Tensor& x, const LaneGraph& g, int k,
                        const DilatedConvWeights& w) {
  if (x.rank() != 2 || x.dim(0) != g.num_nodes()) {
    throw ShapeError("dilated_laneconv features " + shape_str(x.shape()) +
                     " do not match " + std::to_string(g.num_nodes()) +
                     " lane nodes");
  }
  Tensor y = matmul(x, w.w_self);
  add_term(y, g.dilated(AdjType::kPre, k), x, w.w_pre);
  add_term(y, g.dilated(AdjType::kSuc, k), x, w.w_suc);
  return y;
}

Tensor multiscale_laneconv(const Tensor& x, const LaneGraph& g,
                           const MultiScaleWeights& w) {
  if (x.rank() != 2 || x.dim(0) != g.num_nodes()) {
    throw ShapeError("multiscale_laneconv features " + shape_str(x.shape()) +
                     " do not match " + std::to_string(g.num_nodes()) +
                     " lane nodes");
  }
  Tensor y = matmul(x, w.w_self);
  add_term(y, g.adj(AdjType::kLeft), x, w.w_left);
  add_term(y, g.adj(AdjType::kRight), x, w.w_right);
  for (size_t c = 0; c < w.dilations.size(); ++c) {
    add_term(y, g.dilated(AdjType::kPre, w.dilations[c]), x, w.w_pre[c]);
    add_term(y, g.dilated(AdjType::kSuc, w.dilations[c]), x, w.w_suc[c]);
  }
  return y;
}

Tensor graphconv(const Tensor& x, const SparseMatrix& laplacian,
                 const Tensor& w) {
  return matmul(sparse_dense_matmul(laplacian, x), w);
}

NodeFeatureEncoder::NodeFeatureEncoder(ParameterStore& store,
                                       const std::string& name, long channels)
    : shape_mlp_(store, name + ".shape", 2, channels, channels),
      loc_mlp_(store, name + ".loc", 2, channels, channels) {}

Tensor NodeFeatureEncoder::forward(const LaneGraph& g) const {
  const long n = g.num_nodes();
  Tensor extents = Tensor::zeros({n, 2});
  Tensor centers = Tensor::zeros({n, 2});
  double* pe = extents.mutable_data();
  double* pc = centers.mutable_data();
  for (long i = 0; i < n; ++i) {
    const Vec2 d = g.node_ends[i] - g.node_starts[i];
    pe[2 * i] = d.x;
    pe[2 * i + 1] = d.y;
    pc[2 * i] = g.node_centers[i].x;
    pc[2 * i + 1] = g.node_centers[i].y;
  }
  return add(shape_mlp_.forward(extents), loc_mlp_.forward(centers));
}

Tensor node_features(const LaneGraph& g, const NodeFeatureEncoder& encoder) {
  return encoder.forward(g);
}

LaneGcn::LaneGcn(ParameterStore& store, const std::string& name,
                 const MapNetConfig& cfg)
    : cfg_(cfg) {
  const long c = cfg.channels;
  const std::vector<int> dils = cfg.effective_dilations();
  blocks_.resize(cfg.blocks);
  for (int b = 0; b < cfg.blocks; ++b) {
    Block& blk = blocks_[b];
    const std::string prefix = name + ".block" + std::to_string(b);
    if (cfg.graphconv_baseline) {
      blk.w_graph =
          store.create(prefix + ".w_graph", {c, c}, Init::kUniformFanIn);
    } else if (cfg.multi_type) {
      blk.typed.dilations = dils;
      blk.typed.w_self =
          store.create(prefix + ".w_self", {c, c}, Init::kUniformFanIn);
      blk.typed.w_left =
          store.create(prefix + ".w_left", {c, c}, Init::kUniformFanIn);
      blk.typed.w_right =
          store.create(prefix + ".w_right", {c, c}, Init::kUniformFanIn);
      for (int k : dils) {
        blk.typed.w_pre.push_back(store.create(
            prefix + ".w_pre" + std::to_string(k), {c, c}, Init::kUniformFanIn));
        blk.typed.w_suc.push_back(store.create(
            prefix + ".w_suc" + std::to_string(k), {c, c}, Init::kUniformFanIn));
      }
    } else {
      blk.w_self_union =
          store.create(prefix + ".w_self", {c, c}, Init::kUniformFanIn);
      for (int k : dils) {
        blk.w_union.push_back(store.create(prefix + ".w_un" + std::to_string(k),
                                           {c, c}, Init::kUniformFanIn));
      }
    }
    blk.norm1 = LayerNorm(store, prefix + ".norm1", c);
    if (cfg.residual) {
      blk.linear.emplace(store, prefix + ".linear", c, c, /*with_bias=*/false);
      blk.norm2.emplace(store, prefix + ".norm2", c);
    }
  }
}

Tensor LaneGcn::block_op(const Block& b, const Tensor& x, const LaneGraph& g,
                         const SparseMatrix* laplacian,
                         const std::vector<SparseMatrix>* union_powers) const {
  if (cfg_.graphconv_baseline) {
    return graphconv(x, *laplacian, b.w_graph);
  }
  if (cfg_.multi_type) {
    return multiscale_laneconv(x, g, b.typed);
  }
  Tensor y = matmul(x, b.w_self_union);
  for (size_t c = 0; c < union_powers->size(); ++c) {
    add_term(y, (*union_powers)[c], x, b.w_union[c]);
  }
  return y;
}

Tensor LaneGcn::forward(const Tensor& x, const LaneGraph& g) const {
  // Operator inputs shared across blocks.
  std::optional<SparseMatrix> laplacian;
  std::vector<SparseMatrix> union_powers;
  if (cfg_.graphconv_baseline) {
    laplacian = normalized_laplacian(union_adjacency(g));
  } else if (!cfg_.multi_type) {
    const SparseMatrix un = union_adjacency(g);
    for (int k : cfg_.effective_dilations()) {
      union_powers.push_back(sparse_power(un, k, /*binarize=*/true));
    }
  }

  Tensor h = x;
  for (const Block& blk : blocks_) {
    Tensor y = block_op(blk, h, g, laplacian ? &*laplacian : nullptr,
                        &union_powers);
    y = relu(blk.norm1.forward(y));
    if (cfg_.residual) {
      y = blk.norm2->forward(blk.linear->forward(y));
      h = relu(add(y, h));
    } else {
      h = y;
    }
  }
  return h;
}

}  // namespace lanegcn
