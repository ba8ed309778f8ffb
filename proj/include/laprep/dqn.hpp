#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "laprep/mlp.hpp"
#include "laprep/shaping.hpp"

namespace laprep::shaping {

struct DqnConfig {
  double epsilon = 0.2;
  double discount = 0.98;
  std::size_t target_period = 50;
  double target_rate = 0.05;
  double lr = 1e-3;
  std::size_t batch = 32;
  std::size_t total_steps = 200'000;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden{256, 256, 256};
  std::size_t replay_capacity = 100'000;
  /// Env steps collected before the first update.
  std::size_t learning_starts = 1000;
  std::size_t train_every = 1;
  double huber_delta = 1.0;
  std::size_t eval_interval = 2000;
  std::size_t eval_episodes = 50;

  void validate() const;
};

struct CurvePoint {
  std::size_t env_steps = 0;
  double success_rate = 0.0;
};

struct DqnResult {
  nn::Mlp online;
  std::vector<CurvePoint> curve;
};

/// Greedy episodes from start states drawn by the "eval" substream of `seed`.
/// Ties between equal Q-values are broken uniformly at random. An episode
/// succeeds when any of its states is the goal.
double evaluate_policy(const nn::Mlp& params, const GoalTask& task, std::size_t episodes,
                       std::uint64_t seed);

/// Online DQN with a soft-updated target network. The curve is sampled at
/// step 0, every eval_interval env steps and at the end of training.
DqnResult dqn_train(const GoalTask& task, RewardKind kind, const DqnConfig& config,
                    const LatentEmbedding* embedding = nullptr);

/// env_steps,success_rate,seed,kind,maze,config_hash rows appended to `path`.
void append_curve(const std::filesystem::path& path, const std::vector<CurvePoint>& curve,
                  std::uint64_t seed, RewardKind kind, std::string_view maze,
                  std::string_view config_hash);

}  // namespace laprep::shaping
