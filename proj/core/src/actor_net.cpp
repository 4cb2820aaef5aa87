#include "lanegcn/actor_net.hpp"

#include "lanegcn/ops.hpp"

namespace lanegcn {

std::optional<ActorInput> encode_trajectory(
    const std::vector<std::optional<Vec2>>& observed, long history) {
  const long len = static_cast<long>(observed.size());
  if (len > history) {
    throw std::invalid_argument("observation track longer than history (" +
                                std::to_string(len) + " > " +
                                std::to_string(history) + ")");
  }
  if (len == 0 || !observed.back().has_value()) return std::nullopt;
  // Contiguous run of valid points ending at the latest step.
  long run = 0;
  for (long i = len - 1; i >= 0 && observed[i].has_value(); --i) ++run;
  if (run < 2) return std::nullopt;

  Tensor t = Tensor::zeros({3, history});
  double* p = t.mutable_data();
  const long col0 = history - run;  // column of the earliest valid step
  for (long r = 0; r < run; ++r) {
    const long idx = len - run + r;
    const long col = col0 + r;
    if (r > 0) {
      const Vec2 d = *observed[idx] - *observed[idx - 1];
      p[0 * history + col] = d.x;
      p[1 * history + col] = d.y;
    }
    p[2 * history + col] = 1.0;
  }
  return ActorInput{t, *observed.back()};
}

ActorNet::ActorNet(ParameterStore& store, const std::string& name,
                   const ActorNetConfig& cfg)
    : cfg_(cfg),
      output_block_(store, name + ".out", cfg.channels, cfg.channels, 1) {
  groups_.resize(cfg.groups);
  long c_in = 3;
  for (int gi = 0; gi < cfg.groups; ++gi) {
    for (int bi = 0; bi < cfg.blocks_per_group; ++bi) {
      const int stride = bi == 0 ? 2 : 1;
      groups_[gi].emplace_back(store,
                               name + ".g" + std::to_string(gi) + ".b" +
                                   std::to_string(bi),
                               c_in, cfg.channels, stride);
      c_in = cfg.channels;
    }
  }
  for (int gi = 0; gi < cfg.groups; ++gi) {
    lateral_kernels_.push_back(
        store.create(name + ".lat" + std::to_string(gi) + ".kernel",
                     {cfg.channels, cfg.channels, 1}, Init::kUniformFanIn));
    lateral_norms_.emplace_back(store, name + ".lat" + std::to_string(gi),
                                cfg.channels);
  }
}

Tensor ActorNet::forward(const std::vector<ActorInput>& inputs) const {
  std::vector<Tensor> rows;
  rows.reserve(inputs.size());
  for (const ActorInput& input : inputs) {
    std::vector<Tensor> scales;
    Tensor h = input.tensor;
    for (const auto& group : groups_) {
      for (const Res1d& block : group) h = block.forward(h);
      scales.push_back(h);
    }
    // Coarse-to-fine pyramid: lateral 1x1, upsample, sum.
    const int top = static_cast<int>(scales.size()) - 1;
    Tensor p = channel_norm(conv1d(scales[top], lateral_kernels_[top], 1, 0),
                            lateral_norms_[top]);
    for (int gi = top - 1; gi >= 0; --gi) {
      p = upsample_linear(p, scales[gi].dim(1));
      Tensor lat = channel_norm(conv1d(scales[gi], lateral_kernels_[gi], 1, 0),
                                lateral_norms_[gi]);
      p = add(p, lat);
    }
    p = output_block_.forward(p);
    // Latest-time column as the actor feature.
    Tensor cols = transpose(p);  // [t x C]
    rows.push_back(index_select(cols, {cols.dim(0) - 1}));
  }
  if (rows.empty()) return Tensor::zeros({0, cfg_.channels});
  return concat(rows, 0);
}

}  // namespace lanegcn
