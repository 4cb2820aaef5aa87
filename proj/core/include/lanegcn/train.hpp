#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lanegcn/model.hpp"

namespace lanegcn {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  int batch_size = 8;
  int epochs = 36;
  int decay_epoch = 32;       // must be < epochs
  double lr = 1e-3;
  double lr_after_decay = 1e-4;
  long max_steps = 0;         // optional cap on optimizer steps, 0 = none
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::string checkpoint_path;  // saved after training when non-empty
};

// Adam with bias correction over every parameter of a store.
class AdamOptimizer {
 public:
  AdamOptimizer(ParameterStore& params, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);

  void step(double lr);

 private:
  ParameterStore* params_;
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

struct TrainResult {
  std::vector<double> loss_curve;  // total loss per optimizer step
  long steps = 0;
  double final_loss = 0.0;
};

// Mini-batch loop over the corpus: scenes are compiled once, shuffled per
// epoch, stacked block-diagonally, and stepped with Adam under the two-rate
// schedule. Scenarios without any supervised actor are rejected up front; a
// non-finite loss aborts with the offending batch.
TrainResult train(
    const std::vector<Scenario>& corpus, ForecastModel& model,
    const TrainConfig& cfg,
    const std::function<void(long step, double loss)>& on_step = {});

}  // namespace lanegcn
