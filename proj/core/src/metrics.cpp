#include "lanegcn/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace lanegcn {

std::vector<long> rank_modes(const std::vector<double>& scores) {
  std::vector<long> order(scores.size());
  std::iota(order.begin(), order.end(), 0L);
  std::stable_sort(order.begin(), order.end(), [&](long a, long b) {
    return scores[a] > scores[b];
  });
  return order;
}

namespace {

double ade(const std::vector<Vec2>& traj, const std::vector<Vec2>& gt) {
  double acc = 0.0;
  for (size_t t = 0; t < gt.size(); ++t) acc += distance(traj[t], gt[t]);
  return acc / static_cast<double>(gt.size());
}

double fde(const std::vector<Vec2>& traj, const std::vector<Vec2>& gt) {
  return distance(traj.back(), gt.back());
}

template <typename ErrorFn>
double min_over_top_k(const AgentForecast& f, const std::vector<Vec2>& gt,
                      int k, ErrorFn error) {
  if (f.trajectories.empty()) {
    throw std::invalid_argument("forecast without modes");
  }
  for (const auto& traj : f.trajectories) {
    if (traj.size() != gt.size()) {
      throw std::invalid_argument("forecast horizon does not match ground truth");
    }
  }
  const std::vector<long> order = rank_modes(f.scores);
  const int take = std::min<int>(k, static_cast<int>(order.size()));
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < take; ++i) {
    best = std::min(best, error(f.trajectories[order[i]], gt));
  }
  return best;
}

}  // namespace

double min_ade_at(const AgentForecast& f, const std::vector<Vec2>& gt, int k) {
  return min_over_top_k(f, gt, k, ade);
}

double min_fde_at(const AgentForecast& f, const std::vector<Vec2>& gt, int k) {
  return min_over_top_k(f, gt, k, fde);
}

MetricsReport evaluate(const std::vector<AgentForecast>& forecasts,
                       const std::vector<Scenario>& scenarios) {
  std::unordered_map<std::string, const Scenario*> by_id;
  for (const Scenario& s : scenarios) by_id.emplace(s.id, &s);

  MetricsReport report;
  double ade1 = 0.0, fde1 = 0.0, miss1 = 0.0;
  double ade6 = 0.0, fde6 = 0.0, miss6 = 0.0;
  for (const AgentForecast& f : forecasts) {
    auto it = by_id.find(f.scenario_id);
    if (it == by_id.end()) {
      throw std::invalid_argument("forecast for unknown scenario '" +
                                  f.scenario_id + "'");
    }
    const Scenario& s = *it->second;
    auto future = s.futures.find(s.agent_id);
    if (future == s.futures.end()) {
      ++report.skipped;
      continue;
    }
    const std::vector<Vec2>& gt = future->second;
    ade1 += min_ade_at(f, gt, 1);
    ade6 += min_ade_at(f, gt, 6);
    const double f1 = min_fde_at(f, gt, 1);
    const double f6 = min_fde_at(f, gt, 6);
    fde1 += f1;
    fde6 += f6;
    miss1 += f1 > kMissThreshold ? 1.0 : 0.0;
    miss6 += f6 > kMissThreshold ? 1.0 : 0.0;
    ++report.evaluated;
  }
  if (report.evaluated > 0) {
    const double n = static_cast<double>(report.evaluated);
    report.min_ade_k1 = ade1 / n;
    report.min_fde_k1 = fde1 / n;
    report.miss_rate_k1 = miss1 / n;
    report.min_ade_k6 = ade6 / n;
    report.min_fde_k6 = fde6 / n;
    report.miss_rate_k6 = miss6 / n;
  }
  return report;
}

}  // namespace lanegcn
