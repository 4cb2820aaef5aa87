#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "lanegcn/geometry.hpp"
#include "lanegcn/header.hpp"
#include "lanegcn/tensor.hpp"

namespace lanegcn {

// Raised when a loss is requested for a batch without a single supervised
// actor.
class NoSupervisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LossConfig {
  double alpha = 1.0;   // weight of the regression term
  double margin = 0.2;  // classification margin
};

// Index of the mode whose final position is closest to the ground-truth
// final position; ties resolve to the smallest index.
long positive_mode(const Tensor& trajectories,  // [K x H x 2], values only
                   const std::vector<Vec2>& ground_truth);

// Max-margin score loss averaged over M*(K-1) terms: for every non-positive
// mode, max(0, c_k + margin - c_positive). Zero for K = 1.
Tensor classification_loss(const Tensor& scores,  // [M x K]
                           const std::vector<long>& positives, double margin);

// Smooth-l1 distance between positive trajectories and ground truth,
// averaged over M*H steps and summed over the two coordinates:
//   d(r) = 0.5 r^2        for |r| < 1
//   d(r) = |r| - 0.5      otherwise.
Tensor regression_loss(const Tensor& positive_traj,  // [M x H x 2]
                       const Tensor& ground_truth);  // [M x H x 2]

struct LossBreakdown {
  Tensor total;          // classification + alpha * regression
  double classification = 0.0;
  double regression = 0.0;
  long supervised_actors = 0;
};

// Combined objective over every actor with a complete future. Throws
// NoSupervisionError when no actor qualifies.
LossBreakdown total_loss(
    const Forecast& forecast,
    const std::vector<std::optional<std::vector<Vec2>>>& futures,
    const LossConfig& cfg);

}  // namespace lanegcn
