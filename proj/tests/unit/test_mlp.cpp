#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "laprep/adam.hpp"
#include "laprep/checkpoint.hpp"
#include "laprep/error.hpp"
#include "laprep/kernels.hpp"
#include "laprep/mlp.hpp"
#include "laprep/rng.hpp"

using namespace laprep;
using namespace laprep::nn;

namespace {

RowMatrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng = make_stream(seed, "mat");
  std::normal_distribution<double> n(0.0, 1.0);
  RowMatrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// Plain Eigen forward pass.
RowMatrix reference_forward(const Mlp& net, const RowMatrix& x) {
  Eigen::MatrixXd h = x;
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    Eigen::Map<const RowMatrix> w(L.weight.data(), L.in, L.out);
    Eigen::Map<const Eigen::RowVectorXd> b(L.bias.data(), L.out);
    Eigen::MatrixXd z = h * w;
    z.rowwise() += b;
    h = l + 1 < layers.size() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return h;
}

double scalar_loss(const Mlp& net, const RowMatrix& x, const RowMatrix& up) {
  return (net.forward(x).array() * up.array()).sum();
}

}  // namespace

TEST_CASE("init shapes and ranges") {
  const Architecture arch{3, {5, 4}, 2};
  const auto net = Mlp::init(arch, 1);
  REQUIRE(net.layers().size() == 3);
  CHECK(net.num_parameters() == 3 * 5 + 5 + 5 * 4 + 4 + 4 * 2 + 2);
  for (const auto& L : net.layers()) {
    const double bound = std::sqrt(6.0 / static_cast<double>(L.in));
    for (double w : L.weight) CHECK(std::abs(w) <= bound);
    for (double b : L.bias) CHECK(b == 0.0);
  }
  CHECK(Mlp::init(arch, 1) == net);
  CHECK_FALSE(Mlp::init(arch, 2) == net);
}

TEST_CASE("forward matches a plain matrix implementation") {
  const auto net = Mlp::init({4, {7, 6}, 3}, 5);
  const RowMatrix x = random_matrix(9, 4, 1);
  CHECK((net.forward(x) - reference_forward(net, x)).cwiseAbs().maxCoeff() < 1e-12);
  const auto lin = Mlp::init(Architecture::linear(4, 3), 5);
  CHECK((lin.forward(x) - reference_forward(lin, x)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("backward matches central differences") {
  for (const auto& arch : {Architecture{3, {6, 5}, 4}, Architecture::linear(3, 4), Architecture{2, {8}, 1}}) {
    auto net = Mlp::init(arch, 11);
    // Nonzero biases so kinks are less likely to sit near a probe.
    auto flat = net.flatten();
    Rng rng = make_stream(3, "bias");
    for (double& v : flat) v += 0.05 * (uniform_open_closed(rng) - 0.5);
    net.assign_flat(flat);
    const RowMatrix x = random_matrix(7, static_cast<Eigen::Index>(arch.input), 2);
    const RowMatrix up = random_matrix(7, static_cast<Eigen::Index>(arch.output), 3);

    Tape tape;
    net.forward(x, tape);
    const auto analytic = nn::flatten(net.backward(tape, up));
    const auto direct = nn::flatten(net.backward(x, up));
    REQUIRE(analytic.size() == flat.size());
    CHECK(analytic == direct);

    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t i = 0; i < flat.size(); ++i) {
      auto plus = flat, minus = flat;
      plus[i] += h;
      minus[i] -= h;
      Mlp a = net, b = net;
      a.assign_flat(plus);
      b.assign_flat(minus);
      const double fd = (scalar_loss(a, x, up) - scalar_loss(b, x, up)) / (2 * h);
      worst = std::max(worst, std::abs(fd - analytic[i]) / std::max(1.0, std::abs(fd)));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("forward is identical across kernel tables") {
  const auto net = Mlp::init({2, {64, 64}, 5}, 4);
  const RowMatrix x = random_matrix(33, 2, 6);
  const RowMatrix up = random_matrix(33, 5, 7);
  simd::set_active_isa(simd::Isa::Scalar);
  const RowMatrix ref = net.forward(x);
  const auto gref = nn::flatten(net.backward(x, up));
  for (auto isa : simd::supported_isas()) {
    CAPTURE(simd::isa_name(isa));
    simd::set_active_isa(isa);
    CHECK((net.forward(x) - ref).cwiseAbs().maxCoeff() < 1e-10);
    const auto g = nn::flatten(net.backward(x, up));
    for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(std::abs(g[i] - gref[i]) < 1e-9);
  }
  simd::set_active_isa(simd::supported_isas().back());
}

TEST_CASE("soft update") {
  auto target = Mlp::zeros({2, {3}, 1});
  auto online = Mlp::init({2, {3}, 1}, 1);
  soft_update(target, online, 0.25);
  const auto t = target.flatten();
  const auto o = online.flatten();
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == doctest::Approx(0.25 * o[i]));
  soft_update(target, online, 1.0);
  CHECK(target == online);
}

TEST_CASE("adam follows the textbook update") {
  auto net = Mlp::init({2, {3}, 2}, 9);
  AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
  auto state = AdamState::for_network(net, cfg);
  auto theta = net.flatten();
  std::vector<double> m(theta.size(), 0.0), v(theta.size(), 0.0);
  const RowMatrix x = random_matrix(4, 2, 1);
  for (int t = 1; t <= 5; ++t) {
    const RowMatrix up = random_matrix(4, 2, 100 + t);
    const auto grads = net.backward(x, up);
    const auto g = nn::flatten(grads);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(0.9, t));
      const double vh = v[i] / (1 - std::pow(0.999, t));
      theta[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    }
    adam_step(net, grads, state);
    const auto got = net.flatten();
    for (std::size_t i = 0; i < theta.size(); ++i) REQUIRE(got[i] == doctest::Approx(theta[i]).epsilon(1e-12));
  }
  CHECK(state.step == 5);
}

TEST_CASE("adam rejects non-finite gradients") {
  auto net = Mlp::init({2, {3}, 1}, 9);
  auto state = AdamState::for_network(net);
  auto grads = net.zero_gradients();
  grads[0].weight[0] = std::nan("");
  try {
    adam_step(net, grads, state);
    FAIL("expected NumericalFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NumericalFailure);
  }
}

TEST_CASE("checkpoint round trip is bit exact") {
  const auto net = Mlp::init({2, {16, 8}, 5}, 3);
  const auto path = std::filesystem::temp_directory_path() / "laprep_mlp_test.ckpt";
  save_checkpoint(net, path);
  CHECK(load_checkpoint(path) == net);
  CHECK(std::filesystem::file_size(path) ==
        8 + 4 + 4 + 8 * (1 + 2 + 1) + 8 * net.num_parameters());

  // Truncated and garbage files.
  std::filesystem::resize_file(path, 20);
  CHECK_THROWS_AS(load_checkpoint(path), Error);
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTACKPT";
  }
  CHECK_THROWS_AS(load_checkpoint(path), Error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path), Error);
}
