#pragma once

#include <functional>
#include <vector>

namespace lanegcn {

class Tensor;

// Ordered record of executed differentiable operations. While a Tape::Scope
// is active on the current thread, every op whose inputs require gradients
// appends a backward closure over its saved operands. Replaying the record
// in reverse accumulates gradients for everything reachable from the loss.
//
// A tape is confined to one thread; inference without an active scope
// records nothing and is safe to run concurrently with frozen parameters.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::function<void()> backward_step);
  std::size_t size() const { return steps_.size(); }
  void clear() { steps_.clear(); }

  // Tape currently recording on this thread, or nullptr.
  static Tape* active();

  class Scope {
   public:
    explicit Scope(Tape& tape);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* previous_;
  };

 private:
  friend void backward(const Tensor&, Tape&);
  std::vector<std::function<void()>> steps_;
};

// Seeds d(loss)/d(loss) = 1 and replays the tape in reverse. The loss must
// be a scalar produced while the tape was recording. Gradient accumulation
// order is the reverse execution order, so repeated runs over identical
// inputs produce bit-identical gradients.
void backward(const Tensor& loss, Tape& tape);

}  // namespace lanegcn
