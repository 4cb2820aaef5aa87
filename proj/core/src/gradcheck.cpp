#include "lanegcn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lanegcn/tape.hpp"

namespace lanegcn {

void jitter_parameters(std::vector<std::pair<std::string, Tensor>> leaves,
                       double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  for (auto& [name, leaf] : leaves) {
    double* p = leaf.mutable_data();
    for (long i = 0; i < leaf.size(); ++i) p[i] += dist(rng);
  }
}

GradCheckReport check_gradients(
    const std::vector<std::pair<std::string, Tensor>>& leaves,
    const std::function<Tensor()>& forward_loss, long samples_per_tensor,
    double epsilon, std::uint64_t seed) {
  for (const auto& [name, leaf] : leaves) {
    Tensor t = leaf;
    t.set_requires_grad(true);
    t.zero_grad();
  }

  Tape tape;
  {
    Tape::Scope scope(tape);
    Tensor loss = forward_loss();
    backward(loss, tape);
  }

  std::mt19937_64 rng(seed);
  GradCheckReport report;
  for (const auto& [name, leaf] : leaves) {
    Tensor t = leaf;
    std::vector<long> picks(t.size());
    std::iota(picks.begin(), picks.end(), 0L);
    if (samples_per_tensor > 0 && t.size() > samples_per_tensor) {
      std::shuffle(picks.begin(), picks.end(), rng);
      picks.resize(samples_per_tensor);
      std::sort(picks.begin(), picks.end());
    }
    const double* grad = t.grad_data();
    for (long i : picks) {
      const double analytic = grad ? grad[i] : 0.0;
      double* value = t.mutable_data();
      const double saved = value[i];

      auto quotient = [&](double eps) {
        value[i] = saved + eps;
        const double up = forward_loss().at(0);
        value[i] = saved - eps;
        const double down = forward_loss().at(0);
        value[i] = saved;
        return (up - down) / (2.0 * eps);
      };
      auto rel_of = [&](double numeric) {
        return std::fabs(analytic - numeric) /
               std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
      };

      // A poor quotient is re-evaluated at smaller steps: a relu site that
      // happens to lie within eps of its kink stops being crossed once the
      // step shrinks below the gap, while a wrong analytic gradient keeps
      // failing at every step size.
      double rel = rel_of(quotient(epsilon));
      for (double eps = epsilon; rel > 1e-5 && eps > epsilon / 80.0;) {
        eps /= 8.0;
        rel = rel_of(quotient(eps));
      }

      ++report.checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return report;
}

}  // namespace lanegcn
