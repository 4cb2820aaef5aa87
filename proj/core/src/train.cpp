#include "lanegcn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lanegcn/checkpoint.hpp"
#include "lanegcn/tape.hpp"

namespace lanegcn {

AdamOptimizer::AdamOptimizer(ParameterStore& params, double beta1,
                             double beta2, double eps)
    : params_(&params), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& [name, tensor] : params.entries()) {
    m_.emplace_back(tensor.size(), 0.0);
    v_.emplace_back(tensor.size(), 0.0);
  }
}

void AdamOptimizer::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  size_t i = 0;
  for (const auto& [name, entry] : params_->entries()) {
    Tensor tensor = entry;  // shared handle
    const double* g = tensor.grad_data();
    if (g) {
      double* value = tensor.mutable_data();
      std::vector<double>& m = m_[i];
      std::vector<double>& v = v_[i];
      const long n = tensor.size();
      for (long j = 0; j < n; ++j) {
        m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
        v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
        const double m_hat = m[j] / bc1;
        const double v_hat = v[j] / bc2;
        value[j] -= lr * m_hat / (std::sqrt(v_hat) + eps_);
      }
    }
    ++i;
  }
}

TrainResult train(const std::vector<Scenario>& corpus, ForecastModel& model,
                  const TrainConfig& cfg,
                  const std::function<void(long, double)>& on_step) {
  if (corpus.empty()) throw TrainError("training corpus is empty");
  if (cfg.decay_epoch >= cfg.epochs) {
    throw TrainError("decay epoch must be below the total epoch count");
  }

  std::vector<CompiledScene> scenes;
  scenes.reserve(corpus.size());
  for (const Scenario& s : corpus) {
    CompiledScene scene = compile_scene(s, model.config());
    const bool supervised =
        std::any_of(scene.futures.begin(), scene.futures.end(),
                    [](const auto& f) { return f.has_value(); });
    if (supervised) scenes.push_back(std::move(scene));
  }
  if (scenes.empty()) {
    throw TrainError("no scenario in the corpus carries a usable future");
  }

  AdamOptimizer optimizer(model.params(), cfg.adam_beta1, cfg.adam_beta2,
                          cfg.adam_eps);
  std::mt19937_64 rng(cfg.seed);
  std::vector<size_t> order(scenes.size());
  std::iota(order.begin(), order.end(), 0u);

  TrainResult result;
  const long batch = std::max(1, cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = epoch >= cfg.decay_epoch ? cfg.lr_after_decay : cfg.lr;
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(batch)) {
      if (cfg.max_steps > 0 && result.steps >= cfg.max_steps) break;
      std::vector<const CompiledScene*> members;
      for (size_t i = start;
           i < std::min(order.size(), start + static_cast<size_t>(batch));
           ++i) {
        members.push_back(&scenes[order[i]]);
      }
      SceneBatch packed = SceneBatch::pack(members);

      model.params().zero_grad();
      Tape tape;
      LossBreakdown breakdown;
      {
        Tape::Scope scope(tape);
        breakdown = model.loss(packed);
      }
      const double loss_value = breakdown.total.at(0);
      if (!std::isfinite(loss_value)) {
        std::string ids;
        for (const std::string& id : packed.scenario_ids) {
          ids += (ids.empty() ? "" : ", ") + id;
        }
        throw TrainError("non-finite loss at step " +
                         std::to_string(result.steps) + " (batch: " + ids +
                         ")");
      }
      backward(breakdown.total, tape);
      optimizer.step(lr);

      result.loss_curve.push_back(loss_value);
      result.final_loss = loss_value;
      ++result.steps;
      if (on_step) on_step(result.steps, loss_value);
    }
    if (cfg.max_steps > 0 && result.steps >= cfg.max_steps) break;
  }

  if (!cfg.checkpoint_path.empty()) {
    save_checkpoint(cfg.checkpoint_path, model.params());
  }
  return result;
}

}  // namespace lanegcn
