#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "laprep/dqn.hpp"
#include "laprep/error.hpp"
#include "laprep/shaping.hpp"
#include "paths.hpp"

using namespace laprep;
using namespace laprep::shaping;

namespace {

const char* kCorridor =
    "#########\n"
    "#......G#\n"
    "#########\n";

}  // namespace

TEST_CASE("reward names") {
  for (auto k : {RewardKind::Sparse, RewardKind::L2Raw, RewardKind::RawMix, RewardKind::Mix}) {
    CHECK(parse_reward(reward_name(k)) == k);
  }
  CHECK_THROWS_AS(parse_reward("dense"), Error);
}

TEST_CASE("goal task from the maze") {
  const auto spec = grid::GridSpec::load(maze_path("oneroom"));
  const auto task = GoalTask::from_spec(spec);
  CHECK(task.goal.xy == grid::Cell{11, 3});
  CHECK(task.success(task.goal));
  const auto other = GoalTask::from_spec(spec, grid::Cell{1, 1});
  CHECK(other.goal.xy == grid::Cell{1, 1});
  CHECK_THROWS_AS(GoalTask::from_spec(spec, grid::Cell{0, 0}), Error);
  CHECK_THROWS_AS(GoalTask::from_spec(grid::GridSpec::parse("...\n")), Error);
}

TEST_CASE("reward values") {
  const auto spec = grid::GridSpec::parse(kCorridor);
  const auto task = GoalTask::from_spec(spec);
  const auto far = spec.state_at({1, 1});
  // x scaled to [-1, 1] over width 9: cells 1 and 7 map to -0.75 and 0.75.
  CHECK(reward(RewardKind::Sparse, far, task, nullptr) == -1.0);
  CHECK(reward(RewardKind::Sparse, task.goal, task, nullptr) == 0.0);
  CHECK(reward(RewardKind::L2Raw, far, task, nullptr) == doctest::Approx(-1.5));
  CHECK(reward(RewardKind::L2Raw, task.goal, task, nullptr) == 0.0);
  CHECK(reward(RewardKind::RawMix, far, task, nullptr) == doctest::Approx(-1.25));
  CHECK(reward(RewardKind::RawMix, task.goal, task, nullptr) == 0.0);
  try {
    reward(RewardKind::Mix, far, task, nullptr);
    FAIL("expected MissingEmbedding");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingEmbedding);
  }

  LatentEmbedding emb;
  emb.phi = chain::Matrix::Zero(static_cast<Eigen::Index>(spec.num_states()), 2);
  emb.phi(static_cast<Eigen::Index>(far.index), 0) = 3.0;
  emb.phi(static_cast<Eigen::Index>(far.index), 1) = 4.0;
  emb.goal = emb.phi.row(static_cast<Eigen::Index>(task.goal.index)).transpose();
  CHECK(emb.distance_to_goal(far.index) == doctest::Approx(5.0));
  CHECK(reward(RewardKind::Mix, far, task, &emb) == doctest::Approx(0.5 * -5.0 - 0.5));
  CHECK(reward(RewardKind::Mix, task.goal, task, &emb) == 0.0);
}

TEST_CASE("freeze caches the goal row and writes a heatmap") {
  const auto spec = grid::GridSpec::parse(kCorridor);
  const auto task = GoalTask::from_spec(spec);
  const auto net = nn::Mlp::init({2, {4}, 3}, 1);
  const auto emb = LatentEmbedding::freeze(net, task, grid::ReprKind::Position);
  CHECK(emb.phi.rows() == 7);
  CHECK((emb.goal - emb.phi.row(static_cast<Eigen::Index>(task.goal.index)).transpose()).norm() == 0.0);
  CHECK(emb.distance_to_goal(task.goal.index) == 0.0);
  CHECK(emb.distance(0, 3) == doctest::Approx((emb.phi.row(0) - emb.phi.row(3)).norm()));

  const auto path = std::filesystem::temp_directory_path() / "laprep_heatmap_test.csv";
  write_heatmap(path, task, emb, "h");
  std::ifstream in(path);
  std::string line;
  std::vector<std::string> body;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') body.push_back(line);
  }
  REQUIRE(body.size() == 4);  // header + 3 rows
  CHECK(body[1] == ",,,,,,,,");
  CHECK(body[2].rfind(",", 0) == 0);
  std::filesystem::remove(path);
}

TEST_CASE("dqn config validation") {
  DqnConfig c;
  c.validate();
  c.epsilon = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.discount = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.batch = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("greedy evaluation of a hand-built policy") {
  // Zero net: all Q ties, so the policy is a random walk. A net whose output
  // bias favours "right" walks straight to the goal in the corridor.
  const auto spec = grid::GridSpec::parse(kCorridor);
  auto task = GoalTask::from_spec(spec);
  auto net = nn::Mlp::zeros({2, {}, 4});
  net.layers()[0].bias[3] = 1.0;
  CHECK(evaluate_policy(net, task, 20, 1) == 1.0);
  net.layers()[0].bias[3] = 0.0;
  net.layers()[0].bias[2] = 1.0;  // left: only starts on the goal succeed
  task.start = spec.state_at({1, 1});
  CHECK(evaluate_policy(net, task, 20, 1) == 0.0);
  task.start = task.goal;
  CHECK(evaluate_policy(net, task, 20, 1) == 1.0);
  task.start.reset();
  CHECK(evaluate_policy(net, task, 20, 1) == evaluate_policy(net, task, 20, 1));
}

TEST_CASE("dqn learns the corridor and is deterministic") {
  const auto spec = grid::GridSpec::parse(kCorridor);
  const auto task = GoalTask::from_spec(spec);
  DqnConfig c;
  c.total_steps = 2500;
  c.learning_starts = 200;
  c.hidden = {32, 32};
  c.eval_interval = 1000;
  c.eval_episodes = 20;
  c.seed = 3;
  const auto a = dqn_train(task, RewardKind::L2Raw, c);
  REQUIRE(a.curve.size() == 4);
  CHECK(a.curve[0].env_steps == 0);
  CHECK(a.curve[1].env_steps == 1000);
  CHECK(a.curve[3].env_steps == 2500);
  CHECK(a.curve.back().success_rate == 1.0);
  const auto b = dqn_train(task, RewardKind::L2Raw, c);
  CHECK(a.online == b.online);
  CHECK_THROWS_AS(dqn_train(task, RewardKind::Mix, c), Error);
}

TEST_CASE("pretrained embedding separates a far cell from the goal") {
  const auto spec = grid::GridSpec::parse(kCorridor);
  const auto task = GoalTask::from_spec(spec);
  const auto buffer = replay::collect(spec, 40, 50, 1);
  auto cfg = pretrain_config(1, 300);
  cfg.hidden = std::vector<std::size_t>{32, 32};
  const auto emb = pretrain_embedding(task, buffer, cfg);
  CHECK(emb.phi.cols() == 20);
  const auto near = spec.index_of({6, 1}).value();
  const auto far = spec.index_of({1, 1}).value();
  CHECK(emb.distance_to_goal(near) < emb.distance_to_goal(far));
}
