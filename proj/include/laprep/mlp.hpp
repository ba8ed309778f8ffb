#pragma once

// Small fully connected network: affine layers with rectifiers between them
// and an identity output. Forward and reverse-mode passes run on the active
// SIMD kernel table.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace laprep::nn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Architecture {
  std::size_t input = 0;
  std::vector<std::size_t> hidden;
  std::size_t output = 0;

  static Architecture linear(std::size_t input, std::size_t output) { return {input, {}, output}; }
  std::size_t num_layers() const { return hidden.size() + 1; }
  bool operator==(const Architecture&) const = default;
};

/// weight is in x out, row-major.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  bool operator==(const DenseLayer&) const = default;
};

struct LayerGradient {
  std::vector<double> weight;
  std::vector<double> bias;
};
using Gradients = std::vector<LayerGradient>;

/// Activations kept by a training forward pass.
struct Tape {
  std::vector<RowMatrix> inputs;  // input of each layer
  std::vector<RowMatrix> pre;     // pre-activation of each hidden layer
};

class Mlp {
 public:
  Mlp() = default;

  /// Weights ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)), biases zero. Uses the
  /// "init" substream of `seed`.
  static Mlp init(const Architecture& arch, std::uint64_t seed);
  static Mlp zeros(const Architecture& arch);

  const Architecture& arch() const { return arch_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  std::size_t num_parameters() const;

  RowMatrix forward(const RowMatrix& x) const;
  RowMatrix forward(const RowMatrix& x, Tape& tape) const;

  /// Gradients of sum(upstream .* output) with respect to every parameter.
  Gradients backward(const Tape& tape, const RowMatrix& upstream) const;
  Gradients backward(const RowMatrix& x, const RowMatrix& upstream) const;

  Gradients zero_gradients() const;
  bool all_finite() const;

  /// Flat views in layer order (weight then bias), for tests and checkpoints.
  std::vector<double> flatten() const;
  void assign_flat(const std::vector<double>& values);

  bool operator==(const Mlp&) const = default;

 private:
  explicit Mlp(Architecture arch);

  Architecture arch_;
  std::vector<DenseLayer> layers_;
};

std::vector<double> flatten(const Gradients& grads);

/// target <- (1 - rate) * target + rate * online, parameter-wise.
void soft_update(Mlp& target, const Mlp& online, double rate);

}  // namespace laprep::nn
