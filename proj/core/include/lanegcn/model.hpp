#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lanegcn/actor_net.hpp"
#include "lanegcn/fusion.hpp"
#include "lanegcn/header.hpp"
#include "lanegcn/losses.hpp"
#include "lanegcn/map_net.hpp"
#include "lanegcn/normalize.hpp"
#include "lanegcn/scenario.hpp"

namespace lanegcn {

struct ModelConfig {
  long channels = 128;
  std::vector<int> dilations = {1, 2, 4, 8, 16, 32};
  int modes = 6;
  int horizon = kFutureSteps;
  long history = kHistorySteps;

  double a2l_radius = 7.0;
  double l2a_radius = 6.0;
  double a2a_radius = 100.0;
  double region_radius = 100.0;

  // Module toggles (map backbone and the four interaction stages).
  bool use_map = true;
  bool a2l = true;
  bool l2l = true;
  bool l2a = true;
  bool a2a = true;

  // Lane operator variants.
  bool multi_type = true;
  bool dilated = true;
  bool residual = true;
  bool graphconv_baseline = false;

  double alpha = 1.0;
  double margin = 0.2;

  // Slim profile for tests and desk-scale experiments.
  static ModelConfig reduced();

  MapNetConfig map_net_config() const;
  FusionConfig fusion_config() const;
};

// One scenario normalized into its agent frame with everything the model
// consumes precomputed: the lane graph, encoded actor tracks, per-actor
// origins and supervision targets.
struct CompiledScene {
  std::string scenario_id;
  Frame frame;
  LaneGraph graph;
  std::vector<ActorInput> actors;
  std::vector<std::string> actor_ids;
  std::vector<Vec2> actor_origins;
  long agent_index = -1;
  std::vector<std::optional<std::vector<Vec2>>> futures;
};

CompiledScene compile_scene(const Scenario& s, const ModelConfig& cfg);

// Several compiled scenes stacked as disjoint graphs: block-diagonal
// adjacency, offset indices, and group labels that keep attention context
// within each scene.
struct SceneBatch {
  LaneGraph graph;
  std::vector<Tensor> actor_tensors;
  std::vector<Vec2> actor_origins;
  std::vector<long> actor_group;
  std::vector<long> node_group;
  std::vector<long> agent_rows;          // one per scene
  std::vector<std::string> scenario_ids;  // one per scene
  std::vector<Frame> frames;              // one per scene
  std::vector<std::optional<std::vector<Vec2>>> futures;  // per actor row

  static SceneBatch pack(const std::vector<const CompiledScene*>& scenes);
};

class ForecastModel {
 public:
  ForecastModel(const ModelConfig& cfg, std::uint64_t seed);

  Forecast forward(const SceneBatch& batch) const;

  // Forward plus loss for training; futures come from the batch.
  LossBreakdown loss(const SceneBatch& batch) const;

  // Agent rows of a batch forecast as world-frame records.
  std::vector<AgentForecast> agent_forecasts(const Forecast& forecast,
                                             const SceneBatch& batch) const;

  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  const ModelConfig& config() const { return cfg_; }

  // Parameter count under a name prefix such as "map_net.".
  long parameter_count(const std::string& prefix) const;

 private:
  ModelConfig cfg_;
  ParameterStore params_;
  ActorNet actor_net_;
  std::optional<NodeFeatureEncoder> node_encoder_;
  std::optional<LaneGcn> map_net_;
  FusionNet fusion_;
  PredictionHeader header_;
};

}  // namespace lanegcn
