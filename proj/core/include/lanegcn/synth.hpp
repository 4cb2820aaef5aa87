#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lanegcn/scenario.hpp"

namespace lanegcn {

enum class Topology { kStraight, kCurve, kFork, kMerge, kParallel };

Topology topology_from_name(const std::string& name);
const char* topology_name(Topology t);

struct SynthSpec {
  int count = 1;
  std::uint64_t seed = 0;
  Topology topology = Topology::kStraight;
  double speed_min = 5.0;
  double speed_max = 15.0;
};

// A generated scenario plus, for evaluation of mode coverage, the agent's
// continuation along every reachable branch (one entry for unambiguous
// topologies, two at a fork). The realized future in the scenario record
// always matches one of the alternatives.
struct SynthScenario {
  Scenario scenario;
  std::vector<std::vector<Vec2>> agent_alternatives;
};

// Deterministic for a fixed spec. Lanes are sampled at 2 m spacing, placed
// under a random rigid pose; actors travel along centerlines at constant
// sampled speeds with small lateral noise in the observed history and
// noise-free futures. At forks the realized branch is drawn uniformly.
std::vector<SynthScenario> synth_scenarios(const SynthSpec& spec);
std::vector<Scenario> synth_corpus(const SynthSpec& spec);

// Arc-length walk along a polyline, clamped to its end points.
Vec2 walk_polyline(const std::vector<Vec2>& line, double arc_length);

}  // namespace lanegcn
