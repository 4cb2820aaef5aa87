#include "lanegcn/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace lanegcn {

namespace {

constexpr double kPointSpacing = 2.0;
constexpr double kStepSeconds = 0.1;
constexpr double kLaneWidth = 3.5;

struct Pose {
  Vec2 origin;
  Rot2 rot;
  Vec2 place(const Vec2& p) const { return rot.to_world(p) + origin; }
};

std::vector<Vec2> sample_segment(Vec2 a, Vec2 b) {
  const double len = distance(a, b);
  const long n = std::max<long>(2, static_cast<long>(std::round(len / kPointSpacing)) + 1);
  std::vector<Vec2> out;
  out.reserve(n);
  for (long i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / (n - 1);
    out.push_back({a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f});
  }
  return out;
}

// Arc from `start` with initial heading `theta0`, signed curvature radius
// (positive bends left), swept by `arc_len`.
std::vector<Vec2> sample_arc(Vec2 start, double theta0, double radius,
                             double arc_len) {
  const long n =
      std::max<long>(2, static_cast<long>(std::round(arc_len / kPointSpacing)) + 1);
  std::vector<Vec2> out;
  out.reserve(n);
  const Vec2 center{start.x - radius * std::sin(theta0),
                    start.y + radius * std::cos(theta0)};
  for (long i = 0; i < n; ++i) {
    const double s = arc_len * static_cast<double>(i) / (n - 1);
    const double phi = theta0 + s / radius;
    out.push_back({center.x + radius * std::sin(phi),
                   center.y - radius * std::cos(phi)});
  }
  return out;
}

std::vector<Vec2> concat_lines(const std::vector<Vec2>& a,
                               const std::vector<Vec2>& b) {
  std::vector<Vec2> out = a;
  // The shared junction point appears once.
  out.insert(out.end(), b.begin() + (a.back() == b.front() ? 1 : 0), b.end());
  return out;
}

Vec2 tangent_at(const std::vector<Vec2>& line, double arc_length) {
  double remaining = arc_length;
  for (size_t i = 0; i + 1 < line.size(); ++i) {
    const double seg = distance(line[i], line[i + 1]);
    if (remaining <= seg || i + 2 == line.size()) {
      const Vec2 d = line[i + 1] - line[i];
      const double n = d.norm();
      return {d.x / n, d.y / n};
    }
    remaining -= seg;
  }
  return {1.0, 0.0};
}

struct TrackPlan {
  std::string id;
  const std::vector<Vec2>* path;  // full travel polyline in local coords
  double s0 = 0.0;                // arc position at the latest observed step
  double speed = 0.0;
  int history = 20;   // number of valid observed steps
  bool with_future = true;
};

void realize_track(const TrackPlan& plan, const Pose& pose, double noise_sigma,
                   std::mt19937_64& rng, Scenario* out) {
  std::normal_distribution<double> lateral(0.0, noise_sigma);
  ActorTrack actor;
  actor.id = plan.id;
  actor.observed.assign(kHistorySteps, std::nullopt);
  for (int t = 0; t < plan.history; ++t) {
    const int col = kHistorySteps - plan.history + t;
    const double s =
        plan.s0 - (plan.history - 1 - t) * plan.speed * kStepSeconds;
    Vec2 p = walk_polyline(*plan.path, s);
    const Vec2 tan = tangent_at(*plan.path, s);
    const double off = lateral(rng);
    p = {p.x - tan.y * off, p.y + tan.x * off};
    actor.observed[col] = pose.place(p);
  }
  if (plan.with_future) {
    std::vector<Vec2> future;
    future.reserve(kFutureSteps);
    for (int t = 1; t <= kFutureSteps; ++t) {
      future.push_back(pose.place(
          walk_polyline(*plan.path, plan.s0 + t * plan.speed * kStepSeconds)));
    }
    out->futures.emplace(plan.id, std::move(future));
  }
  out->actors.push_back(std::move(actor));
}

std::vector<Vec2> placed_future(const std::vector<Vec2>& path, double s0,
                                double speed, const Pose& pose) {
  std::vector<Vec2> out;
  out.reserve(kFutureSteps);
  for (int t = 1; t <= kFutureSteps; ++t) {
    out.push_back(pose.place(walk_polyline(path, s0 + t * speed * kStepSeconds)));
  }
  return out;
}

}  // namespace

Vec2 walk_polyline(const std::vector<Vec2>& line, double arc_length) {
  if (line.empty()) throw std::invalid_argument("walk along empty polyline");
  if (arc_length <= 0.0) return line.front();
  double remaining = arc_length;
  for (size_t i = 0; i + 1 < line.size(); ++i) {
    const double seg = distance(line[i], line[i + 1]);
    if (remaining <= seg) {
      const double f = remaining / seg;
      return {line[i].x + (line[i + 1].x - line[i].x) * f,
              line[i].y + (line[i + 1].y - line[i].y) * f};
    }
    remaining -= seg;
  }
  return line.back();
}

Topology topology_from_name(const std::string& name) {
  if (name == "straight") return Topology::kStraight;
  if (name == "curve") return Topology::kCurve;
  if (name == "fork") return Topology::kFork;
  if (name == "merge") return Topology::kMerge;
  if (name == "parallel") return Topology::kParallel;
  throw std::invalid_argument("unknown topology '" + name + "'");
}

const char* topology_name(Topology t) {
  switch (t) {
    case Topology::kStraight:
      return "straight";
    case Topology::kCurve:
      return "curve";
    case Topology::kFork:
      return "fork";
    case Topology::kMerge:
      return "merge";
    case Topology::kParallel:
      return "parallel";
  }
  return "?";
}

std::vector<SynthScenario> synth_scenarios(const SynthSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> speed_dist(spec.speed_min,
                                                    spec.speed_max);
  std::uniform_real_distribution<double> shift(-400.0, 400.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);

  std::vector<SynthScenario> out;
  out.reserve(spec.count);
  for (int idx = 0; idx < spec.count; ++idx) {
    Pose pose{{shift(rng), shift(rng)}, Rot2::from_angle(angle(rng))};
    const double speed = speed_dist(rng);

    SynthScenario item;
    Scenario& s = item.scenario;
    s.id = std::string(topology_name(spec.topology)) + "-" +
           std::to_string(spec.seed) + "-" + std::to_string(idx);
    s.agent_id = "agent";

    // Local-frame lane layout plus the agent's travel paths.
    std::vector<std::vector<Vec2>> agent_paths;
    double agent_s0 = 0.0;

    switch (spec.topology) {
      case Topology::kStraight: {
        auto line = sample_segment({0.0, 0.0}, {180.0, 0.0});
        s.lanes.push_back({"l0", line, {}, {}, std::nullopt, std::nullopt});
        agent_paths.push_back(std::move(line));
        agent_s0 = 1.9 * speed + 10.0 * unit(rng);
        break;
      }
      case Topology::kCurve: {
        const double radius = (unit(rng) < 0.5 ? 1.0 : -1.0) *
                              (30.0 + 50.0 * unit(rng));
        auto line = sample_arc({0.0, 0.0}, 0.0, radius, 180.0);
        s.lanes.push_back({"l0", line, {}, {}, std::nullopt, std::nullopt});
        agent_paths.push_back(std::move(line));
        agent_s0 = 1.9 * speed + 10.0 * unit(rng);
        break;
      }
      case Topology::kFork: {
        auto stem = sample_segment({0.0, 0.0}, {100.0, 0.0});
        auto straight = sample_segment({100.0, 0.0}, {190.0, 0.0});
        // A tight turn so the two continuations separate well inside the
        // prediction horizon.
        const double radius =
            (unit(rng) < 0.5 ? 1.0 : -1.0) * (25.0 + 20.0 * unit(rng));
        auto turn = sample_arc({100.0, 0.0}, 0.0, radius, 90.0);
        s.lanes.push_back(
            {"stem", stem, {}, {"keep", "turn"}, std::nullopt, std::nullopt});
        s.lanes.push_back(
            {"keep", straight, {"stem"}, {}, std::nullopt, std::nullopt});
        s.lanes.push_back(
            {"turn", turn, {"stem"}, {}, std::nullopt, std::nullopt});
        agent_paths.push_back(concat_lines(stem, straight));
        agent_paths.push_back(concat_lines(stem, turn));
        // The future crosses the fork point early in the horizon.
        const double cross = 0.3 + 0.3 * unit(rng);
        agent_s0 = 100.0 - 3.0 * speed * cross;
        break;
      }
      case Topology::kMerge: {
        const double approach = 70.0;
        const double alpha = (12.0 + 8.0 * unit(rng)) * M_PI / 180.0;
        auto main_in = sample_segment({0.0, 0.0}, {80.0, 0.0});
        auto ramp = sample_segment({80.0 - approach * std::cos(alpha),
                                    -approach * std::sin(alpha)},
                                   {80.0, 0.0});
        auto cont = sample_segment({80.0, 0.0}, {180.0, 0.0});
        s.lanes.push_back(
            {"main", main_in, {}, {"cont"}, std::nullopt, std::nullopt});
        s.lanes.push_back(
            {"ramp", ramp, {}, {"cont"}, std::nullopt, std::nullopt});
        s.lanes.push_back(
            {"cont", cont, {"main", "ramp"}, {}, std::nullopt, std::nullopt});
        const bool on_main = unit(rng) < 0.5;
        agent_paths.push_back(concat_lines(on_main ? main_in : ramp, cont));
        const double cross = 0.4 + 0.4 * unit(rng);
        agent_s0 = (on_main ? 80.0 : approach) - 3.0 * speed * cross;
        break;
      }
      case Topology::kParallel: {
        auto right_line = sample_segment({0.0, 0.0}, {180.0, 0.0});
        auto left_line =
            sample_segment({0.0, kLaneWidth}, {180.0, kLaneWidth});
        s.lanes.push_back(
            {"l0", right_line, {}, {}, std::string("l1"), std::nullopt});
        s.lanes.push_back(
            {"l1", left_line, {}, {}, std::nullopt, std::string("l0")});
        agent_paths.push_back(std::move(right_line));
        agent_s0 = 1.9 * speed + 10.0 * unit(rng);
        break;
      }
    }

    // Lane geometry moves into the world pose; travel paths stay local and
    // are posed point by point when tracks are realized.
    for (Lane& lane : s.lanes) {
      for (Vec2& p : lane.centerline) p = pose.place(p);
    }

    // Agent history must fit on the path.
    agent_s0 = std::max(agent_s0, 1.9 * speed + 0.5);

    const size_t realized =
        agent_paths.size() > 1
            ? static_cast<size_t>(unit(rng) < 0.5 ? 0 : 1)
            : 0;
    TrackPlan agent_plan{"agent", &agent_paths[realized], agent_s0, speed,
                         kHistorySteps, true};
    realize_track(agent_plan, pose, 0.05, rng, &s);
    for (const auto& path : agent_paths) {
      item.agent_alternatives.push_back(
          placed_future(path, agent_s0, speed, pose));
    }

    // A companion actor trailing on the same layout, sometimes with partial
    // history or no future.
    if (unit(rng) < 0.75) {
      const size_t path_pick =
          agent_paths.size() > 1
              ? static_cast<size_t>(unit(rng) < 0.5 ? 0 : 1)
              : 0;
      TrackPlan other{"actor1", &agent_paths[path_pick], 0.0, speed_dist(rng),
                      20, unit(rng) < 0.8};
      other.history = 2 + static_cast<int>(unit(rng) * 18.0);
      other.s0 = std::max(1.9 * other.speed + 0.5,
                          agent_s0 - 12.0 - 10.0 * unit(rng));
      realize_track(other, pose, 0.05, rng, &s);
    }

    out.push_back(std::move(item));
  }
  return out;
}

std::vector<Scenario> synth_corpus(const SynthSpec& spec) {
  std::vector<Scenario> out;
  auto detailed = synth_scenarios(spec);
  out.reserve(detailed.size());
  for (auto& d : detailed) out.push_back(std::move(d.scenario));
  return out;
}

}  // namespace lanegcn
