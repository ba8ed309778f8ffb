#pragma once

// Collect -> train -> evaluate compositions shared by the command line tool
// and the experiment tests.

#include <cstddef>
#include <cstdint>

#include "laprep/chain.hpp"
#include "laprep/eval.hpp"
#include "laprep/replay.hpp"
#include "laprep/trainer.hpp"

namespace laprep::pipeline {

constexpr std::size_t kEpisodeLength = 50;

/// Uniform-policy buffer of at least n transitions in episodes of 50 steps.
replay::ReplayBuffer buffer_for(const grid::GridSpec& spec, std::size_t n, std::uint64_t seed);

struct TrainedEval {
  repr::TrainResult trained;
  eval::EvalReport report;
};

/// Trains on buffer_for(spec, n, config.seed) and scores against `model`.
TrainedEval train_and_evaluate(const grid::GridSpec& spec, grid::ReprKind kind,
                               const repr::LapRepConfig& config, std::size_t n,
                               const chain::ChainModel& model);

/// Eigenoptions baseline on the same buffer train_and_evaluate would use.
eval::EvalReport baseline_for(const grid::GridSpec& spec, grid::ReprKind kind, std::size_t d,
                              std::size_t n, std::uint64_t seed, const chain::ChainModel& model);

}  // namespace laprep::pipeline
