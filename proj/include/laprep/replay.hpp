#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "laprep/gridworld.hpp"
#include "laprep/rng.hpp"

namespace laprep::replay {

using StateIndex = std::uint32_t;

/// Fixed-length trajectories of state indices, stored flat. Each trajectory
/// holds T + 1 states (T transitions).
class ReplayBuffer {
 public:
  ReplayBuffer() = default;
  ReplayBuffer(std::size_t episode_length, std::vector<StateIndex> flat_states);

  std::size_t episode_length() const { return episode_length_; }
  std::size_t num_trajectories() const {
    return episode_length_ == 0 ? 0 : states_.size() / (episode_length_ + 1);
  }
  std::size_t total_transitions() const { return num_trajectories() * episode_length_; }
  bool empty() const { return total_transitions() == 0; }

  StateIndex at(std::size_t trajectory, std::size_t t) const {
    return states_[trajectory * (episode_length_ + 1) + t];
  }
  std::span<const StateIndex> trajectory(std::size_t i) const {
    return {states_.data() + i * (episode_length_ + 1), episode_length_ + 1};
  }
  const std::vector<StateIndex>& flat() const { return states_; }

  /// Keeps the first `count` trajectories.
  ReplayBuffer head(std::size_t count) const;

  /// Throws InvalidArgument unless every consecutive pair is one step() apart.
  void validate(const grid::GridSpec& spec) const;

  /// CSV rows: trajectory,step,state.
  void save_csv(const std::filesystem::path& path, std::string_view config_hash) const;
  static ReplayBuffer load_csv(const std::filesystem::path& path);

  bool operator==(const ReplayBuffer&) const = default;

 private:
  std::size_t episode_length_ = 0;
  std::vector<StateIndex> states_;
};

/// n_episodes uniform-policy rollouts of length T from uniformly drawn
/// start cells. Uses the "collect" substream of `seed`.
ReplayBuffer collect(const grid::GridSpec& spec, std::size_t n_episodes, std::size_t episode_length,
                     std::uint64_t seed);

/// Episodes needed to hold at least `transitions` transitions.
std::size_t episodes_for(std::size_t transitions, std::size_t episode_length);

struct PairSample {
  StateIndex u = 0;
  StateIndex v = 0;
  std::size_t tau = 1;
};

inline constexpr std::size_t kMaxPairAttempts = 10'000;

/// Uniform over time indices 0..T-1 of every trajectory.
StateIndex sample_state(const ReplayBuffer& buffer, Rng& rng);

/// Draws (trajectory, t) uniformly and tau ~ lambda^(tau-1) (1 - lambda);
/// pairs with t + tau > T are discarded and both are redrawn.
PairSample sample_pair(const ReplayBuffer& buffer, double lambda, Rng& rng);

/// Two independent sample_state draws.
std::pair<StateIndex, StateIndex> sample_negative_pair(const ReplayBuffer& buffer, Rng& rng);

/// Visit frequency of each state over the time indices sample_state uses.
std::vector<double> empirical_distribution(const ReplayBuffer& buffer, std::size_t num_states);

}  // namespace laprep::replay
