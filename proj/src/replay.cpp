#include "laprep/replay.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <string>

#include "laprep/csv.hpp"
#include "laprep/error.hpp"

namespace laprep::replay {

ReplayBuffer::ReplayBuffer(std::size_t episode_length, std::vector<StateIndex> flat_states)
    : episode_length_(episode_length), states_(std::move(flat_states)) {
  if (episode_length_ == 0) fail(ErrorCode::InvalidArgument, "episode length must be >= 1");
  if (states_.size() % (episode_length_ + 1) != 0) {
    fail(ErrorCode::ShapeMismatch, "flat state count is not a multiple of T + 1");
  }
}

ReplayBuffer ReplayBuffer::head(std::size_t count) const {
  count = std::min(count, num_trajectories());
  std::vector<StateIndex> flat(states_.begin(),
                               states_.begin() + static_cast<std::ptrdiff_t>(count * (episode_length_ + 1)));
  return ReplayBuffer(episode_length_, std::move(flat));
}

void ReplayBuffer::validate(const grid::GridSpec& spec) const {
  for (std::size_t i = 0; i < num_trajectories(); ++i) {
    const auto traj = trajectory(i);
    for (std::size_t t = 0; t < episode_length_; ++t) {
      if (traj[t] >= spec.num_states() || traj[t + 1] >= spec.num_states()) {
        fail(ErrorCode::InvalidArgument, "state index out of range in trajectory " + std::to_string(i));
      }
      bool linked = false;
      for (grid::Action a : grid::kActions) {
        if (grid::step(spec, spec.state(traj[t]), a).index == traj[t + 1]) linked = true;
      }
      if (!linked) {
        fail(ErrorCode::InvalidArgument, "trajectory " + std::to_string(i) + " jumps at step " +
                                             std::to_string(t));
      }
    }
  }
}

void ReplayBuffer::save_csv(const std::filesystem::path& path, std::string_view config_hash) const {
  csv::Writer w(path, config_hash);
  w.header({"trajectory", "step", "state"});
  for (std::size_t i = 0; i < num_trajectories(); ++i) {
    for (std::size_t t = 0; t <= episode_length_; ++t) {
      w.row({std::to_string(i), std::to_string(t), std::to_string(at(i, t))});
    }
  }
}

ReplayBuffer ReplayBuffer::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open buffer file " + path.string());
  std::string line;
  std::vector<StateIndex> flat;
  std::size_t expected_traj = 0;
  std::size_t expected_step = 0;
  std::size_t length = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "trajectory,step,state") fail(ErrorCode::Io, "unexpected buffer header in " + path.string());
      header_seen = true;
      continue;
    }
    const auto cells = csv::split(line);
    if (cells.size() != 3) fail(ErrorCode::Io, "malformed buffer row: " + line);
    const auto traj = std::stoull(cells[0]);
    const auto step = std::stoull(cells[1]);
    const auto state = std::stoull(cells[2]);
    if (step == 0 && expected_step != 0) {
      if (length == 0) length = expected_step - 1;
      else if (expected_step - 1 != length) fail(ErrorCode::Io, "trajectories differ in length");
      ++expected_traj;
      expected_step = 0;
    }
    if (traj != expected_traj || step != expected_step) {
      fail(ErrorCode::Io, "buffer rows out of order at: " + line);
    }
    flat.push_back(static_cast<StateIndex>(state));
    ++expected_step;
  }
  if (expected_step == 0) fail(ErrorCode::EmptyBuffer, "buffer file has no rows");
  if (length == 0) length = expected_step - 1;
  else if (expected_step - 1 != length) fail(ErrorCode::Io, "trajectories differ in length");
  return ReplayBuffer(length, std::move(flat));
}

ReplayBuffer collect(const grid::GridSpec& spec, std::size_t n_episodes, std::size_t episode_length,
                     std::uint64_t seed) {
  if (episode_length == 0) fail(ErrorCode::InvalidArgument, "episode length must be >= 1");
  Rng rng = make_stream(seed, "collect");
  std::vector<StateIndex> flat;
  flat.reserve(n_episodes * (episode_length + 1));
  for (std::size_t e = 0; e < n_episodes; ++e) {
    auto s = spec.state(uniform_index(rng, spec.num_states()));
    flat.push_back(static_cast<StateIndex>(s.index));
    for (std::size_t t = 0; t < episode_length; ++t) {
      s = grid::step(spec, s, grid::uniform_policy_action(rng));
      flat.push_back(static_cast<StateIndex>(s.index));
    }
  }
  return ReplayBuffer(episode_length, std::move(flat));
}

std::size_t episodes_for(std::size_t transitions, std::size_t episode_length) {
  return (transitions + episode_length - 1) / episode_length;
}

namespace {
void require_nonempty(const ReplayBuffer& buffer) {
  if (buffer.empty()) fail(ErrorCode::EmptyBuffer, "replay buffer is empty");
}
}  // namespace

StateIndex sample_state(const ReplayBuffer& buffer, Rng& rng) {
  require_nonempty(buffer);
  const std::size_t T = buffer.episode_length();
  const std::size_t slot = uniform_index(rng, buffer.total_transitions());
  return buffer.at(slot / T, slot % T);
}

PairSample sample_pair(const ReplayBuffer& buffer, double lambda, Rng& rng) {
  require_nonempty(buffer);
  const std::size_t T = buffer.episode_length();
  for (std::size_t attempt = 0; attempt < kMaxPairAttempts; ++attempt) {
    const std::size_t slot = uniform_index(rng, buffer.total_transitions());
    const std::size_t traj = slot / T;
    const std::size_t t = slot % T;
    const std::size_t tau = geometric_tau(rng, lambda);
    if (t + tau > T) continue;
    return {buffer.at(traj, t), buffer.at(traj, t + tau), tau};
  }
  fail(ErrorCode::SamplingStuck, "no admissible (t, tau) pair after " +
                                     std::to_string(kMaxPairAttempts) + " attempts");
}

std::pair<StateIndex, StateIndex> sample_negative_pair(const ReplayBuffer& buffer, Rng& rng) {
  const StateIndex a = sample_state(buffer, rng);
  const StateIndex b = sample_state(buffer, rng);
  return {a, b};
}

std::vector<double> empirical_distribution(const ReplayBuffer& buffer, std::size_t num_states) {
  std::vector<double> freq(num_states, 0.0);
  const std::size_t T = buffer.episode_length();
  for (std::size_t i = 0; i < buffer.num_trajectories(); ++i) {
    for (std::size_t t = 0; t < T; ++t) {
      const auto s = buffer.at(i, t);
      if (s >= num_states) fail(ErrorCode::InvalidArgument, "state index out of range");
      freq[s] += 1.0;
    }
  }
  const double total = static_cast<double>(buffer.total_transitions());
  if (total > 0) {
    for (double& f : freq) f /= total;
  }
  return freq;
}

}  // namespace laprep::replay
