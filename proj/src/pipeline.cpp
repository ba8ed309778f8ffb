#include "laprep/pipeline.hpp"

namespace laprep::pipeline {

replay::ReplayBuffer buffer_for(const grid::GridSpec& spec, std::size_t n, std::uint64_t seed) {
  return replay::collect(spec, replay::episodes_for(n, kEpisodeLength), kEpisodeLength, seed);
}

TrainedEval train_and_evaluate(const grid::GridSpec& spec, grid::ReprKind kind,
                               const repr::LapRepConfig& config, std::size_t n,
                               const chain::ChainModel& model) {
  const auto buffer = buffer_for(spec, n, config.seed);
  TrainedEval out{repr::train_repr(config, buffer, spec, kind), {}};
  out.report = eval::objective_gap(eval::embed_all_states(out.trained.params, spec, kind), model);
  out.report.method = "graph-drawing";
  out.report.n_transitions = buffer.total_transitions();
  return out;
}

eval::EvalReport baseline_for(const grid::GridSpec& spec, grid::ReprKind kind, std::size_t d,
                              std::size_t n, std::uint64_t seed, const chain::ChainModel& model) {
  const auto buffer = buffer_for(spec, n, seed);
  auto report = eval::baseline_report(eval::eigenoptions_baseline(buffer, spec, kind, d), model);
  report.n_transitions = buffer.total_transitions();
  return report;
}

}  // namespace laprep::pipeline
