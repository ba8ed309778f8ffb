#pragma once

#include <cstdint>

#include "laprep/mlp.hpp"

namespace laprep::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment accumulators shaped like the network they were created for.
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  Gradients m1;
  Gradients m2;

  static AdamState for_network(const Mlp& net, const AdamConfig& config = {});
};

/// Bias-corrected Adam update. Throws NumericalFailure if a gradient is not
/// finite or a parameter leaves the finite range.
void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

}  // namespace laprep::nn
