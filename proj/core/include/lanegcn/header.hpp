#pragma once

#include <string>
#include <vector>

#include "lanegcn/geometry.hpp"
#include "lanegcn/nn.hpp"

namespace lanegcn {

// Multi-modal output for a batch of actors: K candidate trajectories of H
// future positions each, plus one raw confidence score per mode.
struct Forecast {
  Tensor trajectories;  // [M x K x H x 2]
  Tensor scores;        // [M x K]
  long modes() const { return trajectories.dim(1); }
  long horizon() const { return trajectories.dim(2); }
};

struct HeaderConfig {
  long channels = 128;
  int modes = 6;
  int horizon = 30;
};

// Two-branch prediction head. The regression branch maps each actor
// feature to K*H*2 coordinate offsets added onto the actor origin. The
// classification branch embeds each mode's final offset, concatenates it
// with the actor feature and scores the mode.
class PredictionHeader {
 public:
  PredictionHeader(ParameterStore& store, const std::string& name,
                   const HeaderConfig& cfg);

  Forecast forward(const Tensor& actor_feats,
                   const std::vector<Vec2>& origins) const;

  const HeaderConfig& config() const { return cfg_; }

 private:
  HeaderConfig cfg_;
  LinearRes reg_block_;
  Linear reg_out_;
  EmbedMlp dist_mlp_;
  LinearRes cls_block_;
  Linear cls_out_;
};

}  // namespace lanegcn
