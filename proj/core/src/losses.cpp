#include "lanegcn/losses.hpp"

#include <cmath>
#include <limits>

#include "lanegcn/ops.hpp"
#include "lanegcn/tape.hpp"

namespace lanegcn {

namespace {

double smooth_l1(double r) {
  const double a = std::fabs(r);
  return a < 1.0 ? 0.5 * r * r : a - 0.5;
}

double smooth_l1_slope(double r) {
  const double a = std::fabs(r);
  return a < 1.0 ? r : (r > 0.0 ? 1.0 : -1.0);
}

}  // namespace

long positive_mode(const Tensor& trajectories,
                   const std::vector<Vec2>& ground_truth) {
  if (trajectories.rank() != 3 || trajectories.dim(2) != 2) {
    throw ShapeError("positive_mode expects [K x H x 2], got " +
                     shape_str(trajectories.shape()));
  }
  const long k = trajectories.dim(0);
  const long h = trajectories.dim(1);
  if (ground_truth.size() != static_cast<size_t>(h) || h < 1) {
    throw ShapeError("ground truth horizon mismatch");
  }
  const Vec2 target = ground_truth.back();
  const double* p = trajectories.data();
  long best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (long mode = 0; mode < k; ++mode) {
    const long base = (mode * h + (h - 1)) * 2;
    const Vec2 final{p[base], p[base + 1]};
    const double d = distance(final, target);
    if (d < best_dist) {
      best_dist = d;
      best = mode;
    }
  }
  return best;
}

Tensor classification_loss(const Tensor& scores,
                           const std::vector<long>& positives, double margin) {
  if (scores.rank() != 2) {
    throw ShapeError("classification_loss expects [M x K] scores");
  }
  const long m = scores.dim(0);
  const long k = scores.dim(1);
  if (static_cast<long>(positives.size()) != m) {
    throw ShapeError("one positive mode index required per actor");
  }
  for (long a = 0; a < m; ++a) {
    if (positives[a] < 0 || positives[a] >= k) {
      throw std::out_of_range("positive mode index out of range");
    }
  }
  if (k <= 1 || m == 0) return Tensor::scalar(0.0);

  const double norm = 1.0 / (static_cast<double>(m) * (k - 1));
  const double* p = scores.data();
  double acc = 0.0;
  for (long a = 0; a < m; ++a) {
    const double pos = p[a * k + positives[a]];
    for (long mode = 0; mode < k; ++mode) {
      if (mode == positives[a]) continue;
      acc += std::max(0.0, p[a * k + mode] + margin - pos);
    }
  }
  Tensor out = Tensor::scalar(acc * norm);
  if (Tape::active() && scores.requires_grad()) {
    Tensor sv = scores, ov = out;
    out.set_requires_grad(true);
    Tape::active()->record([sv, ov, positives, margin, m, k, norm]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      const double g = gy[0] * norm;
      const double* p = sv.data();
      double* ds = sv.mutable_grad();
      for (long a = 0; a < m; ++a) {
        const double pos = p[a * k + positives[a]];
        for (long mode = 0; mode < k; ++mode) {
          if (mode == positives[a]) continue;
          if (p[a * k + mode] + margin - pos > 0.0) {
            ds[a * k + mode] += g;
            ds[a * k + positives[a]] -= g;
          }
        }
      }
    });
  }
  return out;
}

Tensor regression_loss(const Tensor& positive_traj, const Tensor& ground_truth) {
  if (positive_traj.rank() != 3 || positive_traj.dim(2) != 2 ||
      positive_traj.shape() != ground_truth.shape()) {
    throw ShapeError("regression_loss expects matching [M x H x 2] tensors");
  }
  const long m = positive_traj.dim(0);
  const long h = positive_traj.dim(1);
  if (m == 0 || h == 0) return Tensor::scalar(0.0);

  const double norm = 1.0 / (static_cast<double>(m) * h);
  const double* pp = positive_traj.data();
  const double* pg = ground_truth.data();
  double acc = 0.0;
  const long n = positive_traj.size();
  for (long i = 0; i < n; ++i) acc += smooth_l1(pp[i] - pg[i]);

  Tensor out = Tensor::scalar(acc * norm);
  if (Tape::active() &&
      (positive_traj.requires_grad() || ground_truth.requires_grad())) {
    Tensor pv = positive_traj, gv = ground_truth, ov = out;
    out.set_requires_grad(true);
    Tape::active()->record([pv, gv, ov, n, norm]() mutable {
      const double* gy = ov.grad_data();
      if (!gy) return;
      const double g = gy[0] * norm;
      const double* pp = pv.data();
      const double* pg = gv.data();
      double* dp = pv.requires_grad() ? pv.mutable_grad() : nullptr;
      double* dg = gv.requires_grad() ? gv.mutable_grad() : nullptr;
      for (long i = 0; i < n; ++i) {
        const double slope = smooth_l1_slope(pp[i] - pg[i]);
        if (dp) dp[i] += g * slope;
        if (dg) dg[i] -= g * slope;
      }
    });
  }
  return out;
}

LossBreakdown total_loss(
    const Forecast& forecast,
    const std::vector<std::optional<std::vector<Vec2>>>& futures,
    const LossConfig& cfg) {
  const long m = forecast.trajectories.dim(0);
  const long k = forecast.trajectories.dim(1);
  const long h = forecast.trajectories.dim(2);
  if (static_cast<long>(futures.size()) != m) {
    throw ShapeError("one future entry required per forecast actor");
  }

  std::vector<long> eligible;
  for (long a = 0; a < m; ++a) {
    if (futures[a] && static_cast<long>(futures[a]->size()) == h) {
      eligible.push_back(a);
    }
  }
  if (eligible.empty()) {
    throw NoSupervisionError("no actor with a complete ground-truth future");
  }
  const long e = static_cast<long>(eligible.size());

  // Positive-mode selection happens on values; gradients flow only into the
  // selected trajectories and the score matrix.
  std::vector<long> positives(e);
  Tensor gt = Tensor::zeros({e, h, 2});
  double* pg = gt.mutable_data();
  const double* pt = forecast.trajectories.data();
  for (long i = 0; i < e; ++i) {
    const long a = eligible[i];
    const std::vector<Vec2>& future = *futures[a];
    Tensor actor_traj({k, h, 2},
                      std::vector<double>(pt + a * k * h * 2,
                                          pt + (a + 1) * k * h * 2));
    positives[i] = positive_mode(actor_traj, future);
    for (long t = 0; t < h; ++t) {
      pg[(i * h + t) * 2] = future[t].x;
      pg[(i * h + t) * 2 + 1] = future[t].y;
    }
  }

  std::vector<long> traj_rows;
  traj_rows.reserve(e * h);
  for (long i = 0; i < e; ++i) {
    const long a = eligible[i];
    for (long t = 0; t < h; ++t) {
      traj_rows.push_back((a * k + positives[i]) * h + t);
    }
  }
  Tensor flat = reshape(forecast.trajectories, {m * k * h, 2});
  Tensor positive_traj = reshape(index_select(flat, traj_rows), {e, h, 2});

  Tensor reg = regression_loss(positive_traj, gt);
  Tensor cls = classification_loss(index_select(forecast.scores, eligible),
                                   positives, cfg.margin);
  Tensor total = add(cls, scale(reg, cfg.alpha));

  LossBreakdown out;
  out.total = total;
  out.classification = cls.at(0);
  out.regression = reg.at(0);
  out.supervised_actors = e;
  return out;
}

}  // namespace lanegcn
