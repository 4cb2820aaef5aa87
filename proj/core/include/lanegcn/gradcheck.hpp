#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lanegcn/tensor.hpp"

namespace lanegcn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  long checked = 0;
  std::string worst;  // "name[index]" of the worst entry

  bool passed(double tolerance = 1e-5) const {
    return max_rel_error <= tolerance;
  }
};

// Compares analytic gradients against central finite differences
// (f(x+eps) - f(x-eps)) / (2 eps) for the given leaf tensors. forward_loss
// must rebuild the scalar loss from current leaf values on every call and
// must not depend on hidden state. With samples_per_tensor = 0 every entry
// is checked; otherwise a seeded random subset per tensor.
//
// The relative error of one entry is |a - n| / max(1, |a|, |n|). Entries
// whose quotient disagrees are re-evaluated at smaller steps, which
// separates relu sites that merely sit within eps of their kink from
// genuinely wrong gradients (see the implementation note).
GradCheckReport check_gradients(
    const std::vector<std::pair<std::string, Tensor>>& leaves,
    const std::function<Tensor()>& forward_loss, long samples_per_tensor = 0,
    double epsilon = 1e-5, std::uint64_t seed = 0);

// Adds seeded uniform noise in [-amplitude, amplitude] to every leaf.
// Freshly initialized models sit on measure-zero relu kinks (zero norm
// biases meet zero-padded inputs exactly), where central differences are
// undefined; a small jitter moves the check to a generic point.
void jitter_parameters(std::vector<std::pair<std::string, Tensor>> leaves,
                       double amplitude, std::uint64_t seed);

}  // namespace lanegcn
