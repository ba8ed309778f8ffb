#include "laprep/adam.hpp"

#include <cmath>

#include "laprep/error.hpp"
#include "laprep/kernels.hpp"

namespace laprep::nn {

AdamState AdamState::for_network(const Mlp& net, const AdamConfig& config) {
  return {config, 0, net.zero_gradients(), net.zero_gradients()};
}

namespace {
void check_finite(const std::vector<double>& values) {
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::NumericalFailure, "non-finite gradient");
  }
}
}  // namespace

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  auto& layers = net.layers();
  if (grads.size() != layers.size() || state.m1.size() != layers.size()) {
    fail(ErrorCode::ShapeMismatch, "gradient/optimizer state does not match network");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grads[l].weight.size() != layers[l].weight.size() || grads[l].bias.size() != layers[l].bias.size()) {
      fail(ErrorCode::ShapeMismatch, "gradient shape mismatch at layer " + std::to_string(l));
    }
    check_finite(grads[l].weight);
    check_finite(grads[l].bias);
  }

  ++state.step;
  const auto t = static_cast<double>(state.step);
  const auto& c = state.config;
  const simd::AdamCoeffs coeffs{c.lr, c.beta1, c.beta2, c.eps, 1.0 - std::pow(c.beta1, t),
                                1.0 - std::pow(c.beta2, t)};
  const auto& k = simd::active_kernels();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& layer = layers[l];
    k.adam_update(layer.weight.data(), grads[l].weight.data(), state.m1[l].weight.data(),
                  state.m2[l].weight.data(), layer.weight.size(), coeffs);
    k.adam_update(layer.bias.data(), grads[l].bias.data(), state.m1[l].bias.data(),
                  state.m2[l].bias.data(), layer.bias.size(), coeffs);
  }
  if (!net.all_finite()) fail(ErrorCode::NumericalFailure, "parameter became non-finite");
}

}  // namespace laprep::nn
