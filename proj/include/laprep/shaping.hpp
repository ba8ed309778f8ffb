#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string_view>

#include "laprep/chain.hpp"
#include "laprep/gridworld.hpp"
#include "laprep/mlp.hpp"
#include "laprep/replay.hpp"
#include "laprep/trainer.hpp"

namespace laprep::shaping {

enum class RewardKind { Sparse, L2Raw, RawMix, Mix };

std::string_view reward_name(RewardKind kind);
RewardKind parse_reward(std::string_view name);

struct GoalTask {
  grid::GridSpec spec;
  grid::GridState goal;
  std::size_t episode_len = 50;
  /// Fixed start state; episodes start uniformly over open cells otherwise.
  std::optional<grid::GridState> start;

  /// Uses the maze's 'G' cell, or `goal` when given.
  static GoalTask from_spec(const grid::GridSpec& spec, std::optional<grid::Cell> goal = std::nullopt);
  bool success(grid::GridState s) const { return s.index == goal.index; }
};

/// Frozen state embedding with the goal row cached at freeze time.
struct LatentEmbedding {
  chain::Matrix phi;  // |S| x d
  chain::Vector goal;

  static LatentEmbedding freeze(const nn::Mlp& params, const GoalTask& task, grid::ReprKind kind);
  double distance_to_goal(std::size_t state) const;
  double distance(std::size_t a, std::size_t b) const;
};

/// Settings used to pretrain the shaping embedding.
repr::LapRepConfig pretrain_config(std::uint64_t seed, std::size_t steps = 30'000);

/// Trains the shaping embedding on position features and freezes it.
LatentEmbedding pretrain_embedding(const GoalTask& task, const replay::ReplayBuffer& buffer,
                                   const repr::LapRepConfig& config);

double reward(RewardKind kind, grid::GridState s_next, const GoalTask& task,
              const LatentEmbedding* embedding);

/// Embedding distance to the goal laid out on the maze grid; walls are empty cells.
void write_heatmap(const std::filesystem::path& path, const GoalTask& task,
                   const LatentEmbedding& embedding, std::string_view config_hash);

}  // namespace laprep::shaping
