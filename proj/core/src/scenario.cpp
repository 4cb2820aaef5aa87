#include "lanegcn/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lanegcn {

using nlohmann::json;

namespace {

json point_to_json(const Vec2& p) { return json::array({p.x, p.y}); }

Vec2 point_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
      !j[1].is_number()) {
    throw ParseError(path + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Vec2> points_from_json(const json& j, const std::string& path,
                                   long expected = -1) {
  if (!j.is_array()) throw ParseError(path + ": expected an array of points");
  if (expected >= 0 && static_cast<long>(j.size()) != expected) {
    throw ParseError(path + ": expected " + std::to_string(expected) +
                     " points, got " + std::to_string(j.size()));
  }
  std::vector<Vec2> out;
  out.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    out.push_back(point_from_json(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::string require_string(const json& j, const char* key,
                           const std::string& path) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ParseError(path + "." + key + ": expected a string");
  }
  return j[key].get<std::string>();
}

}  // namespace

const ActorTrack* Scenario::find_actor(const std::string& actor_id) const {
  for (const ActorTrack& a : actors) {
    if (a.id == actor_id) return &a;
  }
  return nullptr;
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["id"] = s.id;
  j["agent_id"] = s.agent_id;
  j["actors"] = json::array();
  for (const ActorTrack& actor : s.actors) {
    json obs = json::array();
    for (const auto& p : actor.observed) {
      obs.push_back(p ? point_to_json(*p) : json());
    }
    j["actors"].push_back({{"id", actor.id}, {"observed", obs}});
  }
  json lanes = json::array();
  for (const Lane& lane : s.lanes) {
    json lj;
    lj["id"] = lane.id;
    lj["centerline"] = json::array();
    for (const Vec2& p : lane.centerline) {
      lj["centerline"].push_back(point_to_json(p));
    }
    lj["predecessors"] = lane.predecessors;
    lj["successors"] = lane.successors;
    lj["left"] = lane.left ? json(*lane.left) : json();
    lj["right"] = lane.right ? json(*lane.right) : json();
    lanes.push_back(lj);
  }
  j["map"] = {{"lanes", lanes}};
  if (!s.futures.empty()) {
    json f = json::object();
    for (const auto& [id, traj] : s.futures) {
      json t = json::array();
      for (const Vec2& p : traj) t.push_back(point_to_json(p));
      f[id] = t;
    }
    j["futures"] = f;
  }
  return j.dump();
}

Scenario scenario_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("record is not a JSON object");

  Scenario s;
  s.id = require_string(j, "id", "record");
  s.agent_id = require_string(j, "agent_id", "record");

  if (!j.contains("actors") || !j["actors"].is_array()) {
    throw ParseError("record.actors: expected an array");
  }
  for (size_t a = 0; a < j["actors"].size(); ++a) {
    const json& aj = j["actors"][a];
    const std::string path = "record.actors[" + std::to_string(a) + "]";
    ActorTrack actor;
    actor.id = require_string(aj, "id", path);
    if (!aj.contains("observed") || !aj["observed"].is_array() ||
        aj["observed"].size() != kHistorySteps) {
      throw ParseError(path + ".observed: expected " +
                       std::to_string(kHistorySteps) + " entries");
    }
    for (size_t t = 0; t < aj["observed"].size(); ++t) {
      const json& oj = aj["observed"][t];
      if (oj.is_null()) {
        actor.observed.push_back(std::nullopt);
      } else {
        actor.observed.push_back(point_from_json(
            oj, path + ".observed[" + std::to_string(t) + "]"));
      }
    }
    s.actors.push_back(std::move(actor));
  }

  if (!j.contains("map") || !j["map"].is_object() ||
      !j["map"].contains("lanes") || !j["map"]["lanes"].is_array()) {
    throw ParseError("record.map.lanes: expected an array");
  }
  for (size_t l = 0; l < j["map"]["lanes"].size(); ++l) {
    const json& lj = j["map"]["lanes"][l];
    const std::string path = "record.map.lanes[" + std::to_string(l) + "]";
    Lane lane;
    lane.id = require_string(lj, "id", path);
    if (!lj.contains("centerline")) {
      throw ParseError(path + ".centerline: missing");
    }
    lane.centerline = points_from_json(lj["centerline"], path + ".centerline");
    auto read_refs = [&](const char* key, std::vector<std::string>& out) {
      if (!lj.contains(key)) return;
      if (!lj[key].is_array()) {
        throw ParseError(path + "." + key + ": expected an array of ids");
      }
      for (const json& r : lj[key]) {
        if (!r.is_string()) {
          throw ParseError(path + "." + key + ": expected string ids");
        }
        out.push_back(r.get<std::string>());
      }
    };
    read_refs("predecessors", lane.predecessors);
    read_refs("successors", lane.successors);
    auto read_side = [&](const char* key) -> std::optional<std::string> {
      if (!lj.contains(key) || lj[key].is_null()) return std::nullopt;
      if (!lj[key].is_string()) {
        throw ParseError(path + "." + key + ": expected a string or null");
      }
      return lj[key].get<std::string>();
    };
    lane.left = read_side("left");
    lane.right = read_side("right");
    s.lanes.push_back(std::move(lane));
  }

  if (j.contains("futures")) {
    if (!j["futures"].is_object()) {
      throw ParseError("record.futures: expected an object");
    }
    for (const auto& [id, traj] : j["futures"].items()) {
      s.futures[id] =
          points_from_json(traj, "record.futures." + id, kFutureSteps);
    }
  }
  return s;
}

std::vector<Scenario> load_scenarios(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  std::vector<Scenario> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(scenario_from_json(line));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void save_scenarios(const std::string& path,
                    const std::vector<Scenario>& scenarios) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write scenario file: " + path);
  for (const Scenario& s : scenarios) out << scenario_to_json(s) << "\n";
}

std::vector<AgentForecast> load_forecasts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open forecast file: " + path);
  std::vector<AgentForecast> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      AgentForecast f;
      f.scenario_id = require_string(j, "scenario_id", "record");
      if (!j.contains("agent") || !j["agent"].is_object()) {
        throw ParseError("record.agent: expected an object");
      }
      const json& agent = j["agent"];
      if (!agent.contains("trajectories") ||
          !agent["trajectories"].is_array()) {
        throw ParseError("record.agent.trajectories: expected an array");
      }
      for (size_t k = 0; k < agent["trajectories"].size(); ++k) {
        f.trajectories.push_back(points_from_json(
            agent["trajectories"][k],
            "record.agent.trajectories[" + std::to_string(k) + "]",
            kFutureSteps));
      }
      if (!agent.contains("scores") || !agent["scores"].is_array() ||
          agent["scores"].size() != f.trajectories.size()) {
        throw ParseError("record.agent.scores: expected one score per mode");
      }
      for (const json& v : agent["scores"]) {
        if (!v.is_number()) {
          throw ParseError("record.agent.scores: expected numbers");
        }
        f.scores.push_back(v.get<double>());
      }
      out.push_back(std::move(f));
    } catch (const json::parse_error& e) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": invalid JSON: " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void save_forecasts(const std::string& path,
                    const std::vector<AgentForecast>& forecasts) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write forecast file: " + path);
  for (const AgentForecast& f : forecasts) {
    json j;
    j["scenario_id"] = f.scenario_id;
    json trajs = json::array();
    for (const auto& traj : f.trajectories) {
      json t = json::array();
      for (const Vec2& p : traj) t.push_back(point_to_json(p));
      trajs.push_back(t);
    }
    j["agent"] = {{"trajectories", trajs}, {"scores", f.scores}};
    out << j.dump() << "\n";
  }
}

}  // namespace lanegcn
