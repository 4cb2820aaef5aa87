#include "lanegcn/model.hpp"

namespace lanegcn {

ModelConfig ModelConfig::reduced() {
  ModelConfig cfg;
  cfg.channels = 32;
  cfg.dilations = {1, 2, 4};
  return cfg;
}

MapNetConfig ModelConfig::map_net_config() const {
  MapNetConfig m;
  m.channels = channels;
  m.dilations = dilations;
  m.multi_type = multi_type;
  m.dilated = dilated;
  m.residual = residual;
  m.graphconv_baseline = graphconv_baseline;
  return m;
}

FusionConfig ModelConfig::fusion_config() const {
  FusionConfig f;
  f.channels = channels;
  f.a2l_radius = a2l_radius;
  f.l2a_radius = l2a_radius;
  f.a2a_radius = a2a_radius;
  f.a2l = use_map && a2l;
  f.l2l = use_map && l2l;
  f.l2a = use_map && l2a;
  f.a2a = a2a;
  f.l2l_cfg = map_net_config();
  return f;
}

CompiledScene compile_scene(const Scenario& s, const ModelConfig& cfg) {
  NormalizedScenario norm = normalize(s, cfg.region_radius);
  CompiledScene scene;
  scene.scenario_id = s.id;
  scene.frame = norm.frame;
  scene.graph = build_lane_graph(norm.scenario.lanes);
  // Warm the reachability cache so batches can merge it block-diagonally.
  if (scene.graph.num_nodes() > 0 && cfg.use_map) {
    MapNetConfig mcfg = cfg.map_net_config();
    if (mcfg.multi_type && !mcfg.graphconv_baseline) {
      for (int k : mcfg.effective_dilations()) {
        scene.graph.dilated(AdjType::kPre, k);
        scene.graph.dilated(AdjType::kSuc, k);
      }
    }
  }

  for (const ActorTrack& actor : norm.scenario.actors) {
    auto encoded = encode_trajectory(actor.observed, cfg.history);
    if (!encoded) {
      if (actor.id == norm.scenario.agent_id) {
        throw ParseError("scenario '" + s.id +
                         "': agent history has fewer than 2 valid steps");
      }
      continue;  // too little history to be an input or a target
    }
    if (actor.id == norm.scenario.agent_id) {
      scene.agent_index = static_cast<long>(scene.actors.size());
    }
    scene.actors.push_back(std::move(*encoded));
    scene.actor_ids.push_back(actor.id);
    scene.actor_origins.push_back(scene.actors.back().position);
    auto future = norm.scenario.futures.find(actor.id);
    if (future != norm.scenario.futures.end() &&
        static_cast<long>(future->second.size()) == cfg.horizon) {
      scene.futures.emplace_back(future->second);
    } else {
      scene.futures.emplace_back(std::nullopt);
    }
  }
  if (scene.agent_index < 0) {
    throw ParseError("scenario '" + s.id + "' is missing agent '" +
                     s.agent_id + "'");
  }
  return scene;
}

SceneBatch SceneBatch::pack(const std::vector<const CompiledScene*>& scenes) {
  SceneBatch batch;
  std::vector<const LaneGraph*> graphs;
  graphs.reserve(scenes.size());
  long group = 0;
  for (const CompiledScene* scene : scenes) {
    graphs.push_back(&scene->graph);
    for (size_t a = 0; a < scene->actors.size(); ++a) {
      if (static_cast<long>(a) == scene->agent_index) {
        batch.agent_rows.push_back(
            static_cast<long>(batch.actor_tensors.size()));
      }
      batch.actor_tensors.push_back(scene->actors[a].tensor);
      batch.actor_origins.push_back(scene->actor_origins[a]);
      batch.actor_group.push_back(group);
      batch.futures.push_back(scene->futures[a]);
    }
    for (long n = 0; n < scene->graph.num_nodes(); ++n) {
      batch.node_group.push_back(group);
    }
    batch.scenario_ids.push_back(scene->scenario_id);
    batch.frames.push_back(scene->frame);
    ++group;
  }
  batch.graph = merge_graphs(graphs);
  return batch;
}

ForecastModel::ForecastModel(const ModelConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      params_(seed),
      actor_net_(params_, "actor_net",
                 ActorNetConfig{cfg.channels, 3, 2, cfg.history}),
      fusion_(params_, "fusion", cfg.fusion_config()),
      header_(params_, "header",
              HeaderConfig{cfg.channels, cfg.modes, cfg.horizon}) {
  if (cfg.use_map) {
    node_encoder_.emplace(params_, "map_net.input", cfg.channels);
    map_net_.emplace(params_, "map_net", cfg.map_net_config());
  }
}

Forecast ForecastModel::forward(const SceneBatch& batch) const {
  std::vector<ActorInput> actor_inputs;
  actor_inputs.reserve(batch.actor_tensors.size());
  for (size_t a = 0; a < batch.actor_tensors.size(); ++a) {
    actor_inputs.push_back(
        ActorInput{batch.actor_tensors[a], batch.actor_origins[a]});
  }
  Tensor actor_feats = actor_net_.forward(actor_inputs);

  Tensor lane_feats;
  if (map_net_ && batch.graph.num_nodes() > 0) {
    lane_feats = map_net_->forward(node_encoder_->forward(batch.graph),
                                   batch.graph);
  } else {
    lane_feats = Tensor::zeros({0, cfg_.channels});
  }

  FusionNet::Result fused = fusion_.forward(
      actor_feats, batch.actor_origins, batch.actor_group, lane_feats,
      batch.graph.node_centers, batch.node_group, batch.graph);

  return header_.forward(fused.actor_feats, batch.actor_origins);
}

LossBreakdown ForecastModel::loss(const SceneBatch& batch) const {
  Forecast forecast = forward(batch);
  return total_loss(forecast, batch.futures,
                    LossConfig{cfg_.alpha, cfg_.margin});
}

std::vector<AgentForecast> ForecastModel::agent_forecasts(
    const Forecast& forecast, const SceneBatch& batch) const {
  const long k = forecast.trajectories.dim(1);
  const long h = forecast.trajectories.dim(2);
  const double* pt = forecast.trajectories.data();
  const double* ps = forecast.scores.data();
  std::vector<AgentForecast> out;
  out.reserve(batch.agent_rows.size());
  for (size_t scene = 0; scene < batch.agent_rows.size(); ++scene) {
    const long row = batch.agent_rows[scene];
    AgentForecast f;
    f.scenario_id = batch.scenario_ids[scene];
    for (long mode = 0; mode < k; ++mode) {
      std::vector<Vec2> traj;
      traj.reserve(h);
      for (long t = 0; t < h; ++t) {
        const long base = ((row * k + mode) * h + t) * 2;
        traj.push_back({pt[base], pt[base + 1]});
      }
      f.trajectories.push_back(std::move(traj));
      f.scores.push_back(ps[row * k + mode]);
    }
    out.push_back(denormalize_forecast(f, batch.frames[scene]));
  }
  return out;
}

long ForecastModel::parameter_count(const std::string& prefix) const {
  long count = 0;
  for (const auto& [name, tensor] : params_.entries()) {
    if (name.rfind(prefix, 0) == 0) count += tensor.size();
  }
  return count;
}

}  // namespace lanegcn
