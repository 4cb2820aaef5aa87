#include "lanegcn/tape.hpp"

#include <stdexcept>

#include "lanegcn/tensor.hpp"

namespace lanegcn {

namespace {
thread_local Tape* g_active_tape = nullptr;
}

void Tape::record(std::function<void()> backward_step) {
  steps_.push_back(std::move(backward_step));
}

Tape* Tape::active() { return g_active_tape; }

Tape::Scope::Scope(Tape& tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}

Tape::Scope::~Scope() { g_active_tape = previous_; }

void backward(const Tensor& loss, Tape& tape) {
  if (loss.size() != 1) {
    throw std::invalid_argument("backward expects a scalar loss, got shape " +
                                shape_str(loss.shape()));
  }
  if (!loss.requires_grad()) {
    throw std::invalid_argument(
        "loss was not produced under a recording tape");
  }
  Tensor seed = loss;
  seed.mutable_grad()[0] += 1.0;
  for (auto it = tape.steps_.rbegin(); it != tape.steps_.rend(); ++it) {
    (*it)();
  }
}

}  // namespace lanegcn
