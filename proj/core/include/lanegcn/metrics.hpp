#pragma once

#include <vector>

#include "lanegcn/scenario.hpp"

namespace lanegcn {

// Displacement metrics over the top-K scored modes. minADE/minFDE take the
// minimum over those modes of the average / final-step Euclidean error;
// the miss rate is the fraction of evaluated scenarios whose best top-K
// final error exceeds 2 m.
struct MetricsReport {
  double min_ade_k1 = 0.0;
  double min_fde_k1 = 0.0;
  double miss_rate_k1 = 0.0;
  double min_ade_k6 = 0.0;
  double min_fde_k6 = 0.0;
  double miss_rate_k6 = 0.0;
  long evaluated = 0;
  long skipped = 0;  // scenarios without an agent future
};

constexpr double kMissThreshold = 2.0;

// Modes ranked by descending score, ties by smaller index.
std::vector<long> rank_modes(const std::vector<double>& scores);

double min_ade_at(const AgentForecast& f, const std::vector<Vec2>& gt, int k);
double min_fde_at(const AgentForecast& f, const std::vector<Vec2>& gt, int k);

// Matches forecasts to scenarios by id and aggregates metrics for K = 1 and
// K = 6 over the designated agents.
MetricsReport evaluate(const std::vector<AgentForecast>& forecasts,
                       const std::vector<Scenario>& scenarios);

}  // namespace lanegcn
