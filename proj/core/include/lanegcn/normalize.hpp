#pragma once

#include "lanegcn/scenario.hpp"

namespace lanegcn {

// Agent-centric coordinate frame: the agent's position at the latest
// observed step becomes the origin and its heading (from the step before)
// becomes +x. A stationary agent falls back to the identity rotation.
struct Frame {
  Vec2 origin;
  Rot2 rotation;

  Vec2 to_frame(const Vec2& p) const { return rotation.to_frame(p - origin); }
  Vec2 to_world(const Vec2& p) const { return rotation.to_world(p) + origin; }
};

struct NormalizedScenario {
  Scenario scenario;
  Frame frame;
};

// Maps every coordinate by R * (p - origin) and drops actors and lanes
// farther than region_radius from the agent. References to dropped lanes
// are pruned so the remaining map stays closed. Throws ParseError when the
// agent is missing or lacks its two latest observations.
NormalizedScenario normalize(const Scenario& s, double region_radius = 100.0);

// Exact coordinate inverse of normalize for a forecast record.
AgentForecast denormalize_forecast(const AgentForecast& f, const Frame& frame);

}  // namespace lanegcn
