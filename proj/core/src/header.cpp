#include "lanegcn/header.hpp"

#include "lanegcn/ops.hpp"

namespace lanegcn {

PredictionHeader::PredictionHeader(ParameterStore& store,
                                   const std::string& name,
                                   const HeaderConfig& cfg)
    : cfg_(cfg),
      reg_block_(store, name + ".reg_block", cfg.channels, cfg.channels),
      reg_out_(store, name + ".reg_out", cfg.channels,
               static_cast<long>(cfg.modes) * cfg.horizon * 2),
      dist_mlp_(store, name + ".dist", 2, cfg.channels),
      cls_block_(store, name + ".cls_block", 2 * cfg.channels, cfg.channels),
      cls_out_(store, name + ".cls_out", cfg.channels, 1) {}

Forecast PredictionHeader::forward(const Tensor& actor_feats,
                                   const std::vector<Vec2>& origins) const {
  const long m = actor_feats.dim(0);
  const long k = cfg_.modes;
  const long h = cfg_.horizon;
  if (m != static_cast<long>(origins.size())) {
    throw ShapeError("actor features and origins disagree: " +
                     std::to_string(m) + " vs " +
                     std::to_string(origins.size()));
  }

  Tensor offsets = reg_out_.forward(reg_block_.forward(actor_feats));

  Tensor origin_tile = Tensor::zeros({m, k * h * 2});
  {
    double* p = origin_tile.mutable_data();
    for (long a = 0; a < m; ++a) {
      for (long i = 0; i < k * h; ++i) {
        p[a * k * h * 2 + 2 * i] = origins[a].x;
        p[a * k * h * 2 + 2 * i + 1] = origins[a].y;
      }
    }
  }
  Tensor traj = reshape(add(offsets, origin_tile), {m, k, h, 2});

  // Final-step offset of each mode embeds the travelled distance. The
  // embedding input is detached: scoring must rank the modes without
  // shaping the regressed coordinates.
  Tensor final_offsets = Tensor::zeros({m * k, 2});
  {
    const double* po = offsets.data();
    double* pf = final_offsets.mutable_data();
    for (long a = 0; a < m; ++a) {
      for (long mode = 0; mode < k; ++mode) {
        const long src = (a * k * h + mode * h + (h - 1)) * 2;
        pf[(a * k + mode) * 2] = po[src];
        pf[(a * k + mode) * 2 + 1] = po[src + 1];
      }
    }
  }
  Tensor dist_emb = dist_mlp_.forward(final_offsets);

  std::vector<long> actor_rows;
  actor_rows.reserve(m * k);
  for (long a = 0; a < m; ++a) {
    for (long mode = 0; mode < k; ++mode) actor_rows.push_back(a);
  }
  Tensor actor_tile = index_select(actor_feats, actor_rows);
  Tensor joint = concat({dist_emb, actor_tile}, 1);
  Tensor scores =
      reshape(cls_out_.forward(cls_block_.forward(joint)), {m, k});

  return Forecast{traj, scores};
}

}  // namespace lanegcn
