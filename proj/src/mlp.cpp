#include "laprep/mlp.hpp"

#include <cmath>
#include <random>

#include "laprep/error.hpp"
#include "laprep/kernels.hpp"
#include "laprep/rng.hpp"

namespace laprep::nn {

Mlp::Mlp(Architecture arch) : arch_(std::move(arch)) {
  if (arch_.input == 0 || arch_.output == 0) fail(ErrorCode::InvalidArgument, "zero-size layer");
  std::size_t in = arch_.input;
  for (std::size_t l = 0; l < arch_.num_layers(); ++l) {
    const std::size_t out = l < arch_.hidden.size() ? arch_.hidden[l] : arch_.output;
    if (out == 0) fail(ErrorCode::InvalidArgument, "zero-size layer");
    layers_.push_back({in, out, std::vector<double>(in * out, 0.0), std::vector<double>(out, 0.0)});
    in = out;
  }
}

Mlp Mlp::zeros(const Architecture& arch) { return Mlp(arch); }

Mlp Mlp::init(const Architecture& arch, std::uint64_t seed) {
  Mlp net(arch);
  Rng rng = make_stream(seed, "init");
  for (auto& layer : net.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : layer.weight) w = dist(rng);
  }
  return net;
}

std::size_t Mlp::num_parameters() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

RowMatrix Mlp::forward(const RowMatrix& x) const {
  Tape scratch;
  return forward(x, scratch);
}

RowMatrix Mlp::forward(const RowMatrix& x, Tape& tape) const {
  if (static_cast<std::size_t>(x.cols()) != arch_.input) {
    fail(ErrorCode::ShapeMismatch, "input width " + std::to_string(x.cols()) + " != " +
                                       std::to_string(arch_.input));
  }
  const auto& k = simd::active_kernels();
  const auto rows = static_cast<std::size_t>(x.rows());
  tape.inputs.clear();
  tape.pre.clear();
  RowMatrix a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    RowMatrix z(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(layer.out));
    k.gemm(a.data(), layer.weight.data(), z.data(), rows, layer.in, layer.out, false);
    k.add_bias(z.data(), layer.bias.data(), rows, layer.out);
    tape.inputs.push_back(std::move(a));
    if (l + 1 < layers_.size()) {
      a.resize(z.rows(), z.cols());
      k.relu(z.data(), a.data(), static_cast<std::size_t>(z.size()));
      tape.pre.push_back(std::move(z));
    } else {
      a = std::move(z);
    }
  }
  return a;
}

Gradients Mlp::backward(const Tape& tape, const RowMatrix& upstream) const {
  if (tape.inputs.size() != layers_.size()) fail(ErrorCode::ShapeMismatch, "tape does not match network");
  const auto rows = static_cast<std::size_t>(tape.inputs.front().rows());
  if (static_cast<std::size_t>(upstream.rows()) != rows ||
      static_cast<std::size_t>(upstream.cols()) != arch_.output) {
    fail(ErrorCode::ShapeMismatch, "upstream gradient shape mismatch");
  }
  const auto& k = simd::active_kernels();
  Gradients grads(layers_.size());
  RowMatrix g = upstream;
  std::vector<double> scratch;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& layer = layers_[li];
    const RowMatrix& input = tape.inputs[li];
    auto& grad = grads[li];

    // dW = input^T g
    scratch.resize(layer.in * rows);
    simd::transpose(input.data(), scratch.data(), rows, layer.in);
    grad.weight.resize(layer.in * layer.out);
    k.gemm(scratch.data(), g.data(), grad.weight.data(), layer.in, rows, layer.out, false);
    grad.bias.resize(layer.out);
    k.column_sums(g.data(), grad.bias.data(), rows, layer.out);

    if (li == 0) break;
    // d input = g W^T, gated by the rectifier of the previous layer.
    scratch.resize(layer.out * layer.in);
    simd::transpose(layer.weight.data(), scratch.data(), layer.in, layer.out);
    RowMatrix prev(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(layer.in));
    k.gemm(g.data(), scratch.data(), prev.data(), rows, layer.out, layer.in, false);
    k.relu_backward(tape.pre[li - 1].data(), prev.data(), static_cast<std::size_t>(prev.size()));
    g = std::move(prev);
  }
  return grads;
}

Gradients Mlp::backward(const RowMatrix& x, const RowMatrix& upstream) const {
  Tape tape;
  forward(x, tape);
  return backward(tape, upstream);
}

Gradients Mlp::zero_gradients() const {
  Gradients grads(layers_.size());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    grads[l].weight.assign(layers_[l].weight.size(), 0.0);
    grads[l].bias.assign(layers_[l].bias.size(), 0.0);
  }
  return grads;
}

bool Mlp::all_finite() const {
  for (const auto& layer : layers_) {
    for (double w : layer.weight) {
      if (!std::isfinite(w)) return false;
    }
    for (double b : layer.bias) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

std::vector<double> Mlp::flatten() const {
  std::vector<double> out;
  out.reserve(num_parameters());
  for (const auto& layer : layers_) {
    out.insert(out.end(), layer.weight.begin(), layer.weight.end());
    out.insert(out.end(), layer.bias.begin(), layer.bias.end());
  }
  return out;
}

void Mlp::assign_flat(const std::vector<double>& values) {
  if (values.size() != num_parameters()) fail(ErrorCode::ShapeMismatch, "flat parameter count mismatch");
  auto it = values.begin();
  for (auto& layer : layers_) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(layer.weight.size()), layer.weight.begin());
    it += static_cast<std::ptrdiff_t>(layer.weight.size());
    std::copy(it, it + static_cast<std::ptrdiff_t>(layer.bias.size()), layer.bias.begin());
    it += static_cast<std::ptrdiff_t>(layer.bias.size());
  }
}

std::vector<double> flatten(const Gradients& grads) {
  std::vector<double> out;
  for (const auto& g : grads) {
    out.insert(out.end(), g.weight.begin(), g.weight.end());
    out.insert(out.end(), g.bias.begin(), g.bias.end());
  }
  return out;
}

void soft_update(Mlp& target, const Mlp& online, double rate) {
  if (!(target.arch() == online.arch())) fail(ErrorCode::ShapeMismatch, "soft_update architecture mismatch");
  auto mix = [rate](std::vector<double>& t, const std::vector<double>& o) {
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = (1.0 - rate) * t[i] + rate * o[i];
  };
  for (std::size_t l = 0; l < target.layers().size(); ++l) {
    mix(target.layers()[l].weight, online.layers()[l].weight);
    mix(target.layers()[l].bias, online.layers()[l].bias);
  }
}

}  // namespace laprep::nn
