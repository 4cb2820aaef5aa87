#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lanegcn/geometry.hpp"
#include "lanegcn/lane_graph.hpp"

namespace lanegcn {

inline constexpr int kHistorySteps = 20;  // 2 s of observation at 10 Hz
inline constexpr int kFutureSteps = 30;   // 3 s horizon at 10 Hz

struct ActorTrack {
  std::string id;
  // Exactly kHistorySteps entries; missing observations are nullopt.
  std::vector<std::optional<Vec2>> observed;
};

struct Scenario {
  std::string id;
  std::string agent_id;
  std::vector<ActorTrack> actors;
  std::vector<Lane> lanes;
  // actor id -> exactly kFutureSteps positions
  std::map<std::string, std::vector<Vec2>> futures;

  const ActorTrack* find_actor(const std::string& actor_id) const;
};

// One JSON object per line. Parse failures carry the line number and the
// offending field path.
std::vector<Scenario> load_scenarios(const std::string& path);
void save_scenarios(const std::string& path,
                    const std::vector<Scenario>& scenarios);

std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& line);

// Evaluation-facing record: the designated agent's K candidate
// trajectories and raw scores, in world coordinates.
struct AgentForecast {
  std::string scenario_id;
  std::vector<std::vector<Vec2>> trajectories;  // K x kFutureSteps
  std::vector<double> scores;                   // K
};

std::vector<AgentForecast> load_forecasts(const std::string& path);
void save_forecasts(const std::string& path,
                    const std::vector<AgentForecast>& forecasts);

}  // namespace lanegcn
