#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lanegcn/geometry.hpp"
#include "lanegcn/nn.hpp"

namespace lanegcn {

// Per-actor network input: a [3 x T] tensor whose rows are the step
// displacements dx, dy and a validity mask. Padded (oldest) steps are zero
// with mask 0; the mask is always a zero prefix followed by ones.
struct ActorInput {
  Tensor tensor;   // [3 x T]
  Vec2 position;   // location at the latest observed step
};

// Encodes an observation track of up to `history` optional points ending at
// the current step. Uses the contiguous run of valid points that reaches
// the latest step; the earliest valid step gets displacement zero. Returns
// nullopt when fewer than 2 usable points exist (insufficient history).
std::optional<ActorInput> encode_trajectory(
    const std::vector<std::optional<Vec2>>& observed, long history = 20);

struct ActorNetConfig {
  long channels = 128;
  int groups = 3;
  int blocks_per_group = 2;
  long history = 20;
};

// Temporal 1D CNN over the displacement encoding: three stride-2 residual
// groups, top-down pyramid fusion with 1x1 laterals and linear upsampling,
// one more residual block, then the feature at the latest time column.
class ActorNet {
 public:
  ActorNet(ParameterStore& store, const std::string& name,
           const ActorNetConfig& cfg);

  // One feature row per actor, [M x channels]. Actors are independent.
  Tensor forward(const std::vector<ActorInput>& inputs) const;

  const ActorNetConfig& config() const { return cfg_; }

 private:
  ActorNetConfig cfg_;
  std::vector<std::vector<Res1d>> groups_;
  std::vector<Tensor> lateral_kernels_;  // [C x C x 1]
  std::vector<LayerNorm> lateral_norms_;
  Res1d output_block_;
};

}  // namespace lanegcn
