#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "laprep/chain.hpp"
#include "laprep/error.hpp"
#include "laprep/eval.hpp"
#include "laprep/trainer.hpp"
#include "oracles.hpp"

using namespace laprep;
using namespace laprep::repr;

namespace {

const char* kSmallRoom =
    "#######\n"
    "#.....#\n"
    "#.....#\n"
    "#.....#\n"
    "#######\n";

ErrorCode code_of(const LapRepConfig& c) {
  try {
    c.validate();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;  // sentinel: no throw
}

}  // namespace

TEST_CASE("config validation") {
  LapRepConfig ok;
  ok.validate();
  CHECK(ok.effective_beta() == doctest::Approx(1.0));
  LapRepConfig c;
  c.d = 0;
  CHECK(code_of(c) == ErrorCode::InvalidArgument);
  c = {};
  c.lambda = 1.0;
  CHECK(code_of(c) == ErrorCode::InvalidArgument);
  c = {};
  c.delta_scale = 0.0;
  CHECK(code_of(c) == ErrorCode::InvalidArgument);
  c = {};
  c.beta = -1.0;
  CHECK(code_of(c) == ErrorCode::InvalidArgument);
  c = {};
  c.batch = 0;
  CHECK(code_of(c) == ErrorCode::InvalidArgument);
  c = {};
  c.lr = 0.0;
  CHECK(code_of(c) == ErrorCode::InvalidArgument);
}

TEST_CASE("default architectures") {
  const auto spec = grid::GridSpec::parse(kSmallRoom);
  LapRepConfig c;
  c.d = 3;
  const auto idx = default_architecture(spec, grid::ReprKind::Index, c);
  CHECK(idx == nn::Architecture::linear(spec.num_states(), 3));
  const auto pos = default_architecture(spec, grid::ReprKind::Position, c);
  CHECK(pos.input == 2);
  CHECK(pos.hidden == std::vector<std::size_t>{200, 200});
  c.hidden = std::vector<std::size_t>{8};
  CHECK(default_architecture(spec, grid::ReprKind::Position, c).hidden == std::vector<std::size_t>{8});
}

TEST_CASE("parameter gradients of the batch loss match central differences") {
  const auto spec = grid::GridSpec::parse(kSmallRoom);
  const auto buffer = replay::collect(spec, 5, 20, 1);
  LapRepConfig config;
  config.d = 3;
  config.beta = 2.0;
  config.delta_scale = 0.5;
  config.lambda = 0.5;
  config.batch = 6;
  config.hidden = std::vector<std::size_t>{7};
  for (auto kind : {grid::ReprKind::Index, grid::ReprKind::Position}) {
    CAPTURE(grid::repr_name(kind));
    const auto features = feature_table(spec, kind);
    auto net = nn::Mlp::init(default_architecture(spec, kind, config), 3);
    // The centre cell encodes to (0, 0); shift the zero biases off the kink.
    for (auto& layer : net.layers()) {
      for (std::size_t j = 0; j < layer.bias.size(); ++j) layer.bias[j] = 0.01 * static_cast<double>(j + 1);
    }
    Rng rng = make_stream(4, "batch");
    const auto batch = sample_batch(buffer, config, rng);
    const auto analytic = nn::flatten(total_loss(net, features, batch, config).grads);
    auto f = [&](const std::vector<double>& theta) {
      nn::Mlp probe = net;
      probe.assign_flat(theta);
      return total_loss(probe, features, batch, config).terms.total;
    };
    const auto fd = oracle::central_differences(f, net.flatten(), 1e-6);
    for (std::size_t i = 0; i < fd.size(); ++i) {
      REQUIRE(analytic[i] == doctest::Approx(fd[i]).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("reused negatives share u with the positive batch") {
  const auto spec = grid::GridSpec::parse(kSmallRoom);
  const auto buffer = replay::collect(spec, 5, 20, 1);
  LapRepConfig config;
  config.batch = 16;
  config.reuse_negative_u = true;
  Rng rng = make_stream(1, "batch");
  const auto batch = sample_batch(buffer, config, rng);
  CHECK(batch.u_neg == batch.u);
  CHECK(batch.w.size() == 16);
}

TEST_CASE("batch attractive term is an unbiased estimate of the exact objective") {
  // Linear index model: row s of the weight matrix is the embedding of s.
  const auto spec = grid::GridSpec::parse(kSmallRoom);
  const auto buffer = replay::collect(spec, 4000, 50, 2);
  LapRepConfig config;
  config.d = 2;
  config.batch = 256;
  auto net = nn::Mlp::init(default_architecture(spec, grid::ReprKind::Index, config), 5);
  const auto features = feature_table(spec, grid::ReprKind::Index);
  const Eigen::MatrixXd f = net.forward(features);

  const auto model = chain::ChainModel::build(spec, {0.0});
  const double exact = oracle::expectation_objective(f, model.p, model.rho);

  Rng rng = make_stream(6, "mc");
  double sum = 0.0, sum_sq = 0.0;
  const int rounds = 400;
  for (int r = 0; r < rounds; ++r) {
    const double a = total_loss(net, features, sample_batch(buffer, config, rng), config).terms.attractive;
    sum += a;
    sum_sq += a * a;
  }
  const double mean = sum / rounds;
  const double se = std::sqrt((sum_sq / rounds - mean * mean) / rounds);
  CHECK(std::abs(mean - exact) < 4.0 * se + 1e-3 * exact);
}

TEST_CASE("training is deterministic and logs on the interval") {
  const auto spec = grid::GridSpec::parse(kSmallRoom);
  const auto buffer = replay::collect(spec, 20, 50, 3);
  LapRepConfig config;
  config.d = 3;
  config.steps = 25;
  config.log_interval = 10;
  config.seed = 7;
  const auto a = train_repr(config, buffer, spec, grid::ReprKind::Index);
  const auto b = train_repr(config, buffer, spec, grid::ReprKind::Index);
  CHECK(a.params == b.params);
  REQUIRE(a.log.records.size() == 3);
  CHECK(a.log.records[0].step == 10);
  CHECK(a.log.records[1].step == 20);
  CHECK(a.log.records[2].step == 25);
  for (const auto& r : a.log.records) {
    CHECK(r.total == doctest::Approx(r.attractive + config.effective_beta() * r.repulsive));
  }
  config.seed = 8;
  CHECK_FALSE(train_repr(config, buffer, spec, grid::ReprKind::Index).params == a.params);

  config.steps = 0;
  const auto untouched = train_repr(config, buffer, spec, grid::ReprKind::Index);
  CHECK(untouched.params == nn::Mlp::init(untouched.params.arch(), 8));
  CHECK(untouched.log.records.empty());

  config.steps = 3;
  try {
    train_repr(config, replay::ReplayBuffer{}, spec, grid::ReprKind::Index);
    FAIL("expected EmptyBuffer");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyBuffer);
  }

  const auto dir = std::filesystem::temp_directory_path() / "laprep_trainer_test";
  std::filesystem::create_directories(dir);
  a.log.save_csv(dir / "log.csv", "abc");
  a.log.save_timing(dir / "timing.csv", "abc");
  std::ifstream in(dir / "log.csv");
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.find("step,attractive,repulsive,total") != std::string::npos);
  CHECK(text.find("wall") == std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("linear index model reaches the exact optimum on a small room") {
  const auto spec = grid::GridSpec::parse(kSmallRoom);
  const auto buffer = replay::collect(spec, 400, 50, 4);
  const auto model = chain::ChainModel::build(spec, {0.0});
  LapRepConfig config;
  config.d = 3;
  config.beta = 5.0;
  config.delta_scale = 0.05;
  config.batch = 128;
  config.steps = 6000;
  config.lr = 3e-3;
  config.log_interval = 1000;
  const auto trained = train_repr(config, buffer, spec, grid::ReprKind::Index);
  const auto report = eval::objective_gap(eval::embed_all_states(trained.params, spec, grid::ReprKind::Index), model);
  CHECK(report.effective_rank == 3);
  CHECK(report.gap < 0.01);
  CHECK(trained.log.records.back().total < trained.log.records.front().total);
}
