#include "lanegcn/normalize.hpp"

#include <algorithm>
#include <set>

namespace lanegcn {

NormalizedScenario normalize(const Scenario& s, double region_radius) {
  const ActorTrack* agent = s.find_actor(s.agent_id);
  if (!agent) {
    throw ParseError("scenario '" + s.id + "' is missing agent '" +
                     s.agent_id + "'");
  }
  const size_t steps = agent->observed.size();
  if (steps < 2 || !agent->observed[steps - 1] || !agent->observed[steps - 2]) {
    throw ParseError("scenario '" + s.id +
                     "': agent needs observations at its two latest steps");
  }
  const Vec2 origin = *agent->observed[steps - 1];
  const Vec2 heading = origin - *agent->observed[steps - 2];
  Frame frame{origin, Rot2::from_heading(heading)};

  NormalizedScenario out;
  out.frame = frame;
  out.scenario.id = s.id;
  out.scenario.agent_id = s.agent_id;

  for (const ActorTrack& actor : s.actors) {
    // Actor distance is measured at its latest observation.
    const Vec2* last = nullptr;
    for (auto it = actor.observed.rbegin(); it != actor.observed.rend(); ++it) {
      if (*it) {
        last = &**it;
        break;
      }
    }
    const bool is_agent = actor.id == s.agent_id;
    if (!is_agent && (!last || distance(*last, origin) >= region_radius)) {
      continue;
    }
    ActorTrack kept;
    kept.id = actor.id;
    for (const auto& p : actor.observed) {
      kept.observed.push_back(p ? std::optional<Vec2>(frame.to_frame(*p))
                                : std::nullopt);
    }
    out.scenario.actors.push_back(std::move(kept));
  }

  std::set<std::string> kept_lanes;
  for (const Lane& lane : s.lanes) {
    const bool near = std::any_of(
        lane.centerline.begin(), lane.centerline.end(),
        [&](const Vec2& p) { return distance(p, origin) < region_radius; });
    if (near) kept_lanes.insert(lane.id);
  }
  for (const Lane& lane : s.lanes) {
    if (!kept_lanes.count(lane.id)) continue;
    Lane kept;
    kept.id = lane.id;
    for (const Vec2& p : lane.centerline) {
      kept.centerline.push_back(frame.to_frame(p));
    }
    for (const std::string& r : lane.predecessors) {
      if (kept_lanes.count(r)) kept.predecessors.push_back(r);
    }
    for (const std::string& r : lane.successors) {
      if (kept_lanes.count(r)) kept.successors.push_back(r);
    }
    if (lane.left && kept_lanes.count(*lane.left)) kept.left = lane.left;
    if (lane.right && kept_lanes.count(*lane.right)) kept.right = lane.right;
    out.scenario.lanes.push_back(std::move(kept));
  }

  for (const auto& [id, future] : s.futures) {
    if (!out.scenario.find_actor(id)) continue;
    std::vector<Vec2> mapped;
    mapped.reserve(future.size());
    for (const Vec2& p : future) mapped.push_back(frame.to_frame(p));
    out.scenario.futures.emplace(id, std::move(mapped));
  }
  return out;
}

AgentForecast denormalize_forecast(const AgentForecast& f, const Frame& frame) {
  AgentForecast out;
  out.scenario_id = f.scenario_id;
  out.scores = f.scores;
  out.trajectories.reserve(f.trajectories.size());
  for (const auto& traj : f.trajectories) {
    std::vector<Vec2> mapped;
    mapped.reserve(traj.size());
    for (const Vec2& p : traj) mapped.push_back(frame.to_world(p));
    out.trajectories.push_back(std::move(mapped));
  }
  return out;
}

}  // namespace lanegcn
