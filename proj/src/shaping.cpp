#include "laprep/shaping.hpp"

#include <cmath>
#include <string>

#include "laprep/csv.hpp"
#include "laprep/error.hpp"
#include "laprep/eval.hpp"

namespace laprep::shaping {

std::string_view reward_name(RewardKind kind) {
  switch (kind) {
    case RewardKind::Sparse: return "sparse";
    case RewardKind::L2Raw: return "l2";
    case RewardKind::RawMix: return "rawmix";
    case RewardKind::Mix: return "mix";
  }
  return "?";
}

RewardKind parse_reward(std::string_view name) {
  if (name == "sparse") return RewardKind::Sparse;
  if (name == "l2") return RewardKind::L2Raw;
  if (name == "rawmix") return RewardKind::RawMix;
  if (name == "mix") return RewardKind::Mix;
  fail(ErrorCode::InvalidArgument, "unknown reward kind '" + std::string(name) + "'");
}

GoalTask GoalTask::from_spec(const grid::GridSpec& spec, std::optional<grid::Cell> goal) {
  GoalTask task{spec, {}, 50, std::nullopt};
  if (goal) {
    if (!spec.is_open(*goal)) fail(ErrorCode::InvalidArgument, "goal must be an open cell");
    task.goal = spec.state_at(*goal);
  } else if (spec.goal()) {
    task.goal = *spec.goal();
  } else {
    fail(ErrorCode::InvalidArgument, "maze '" + spec.name() + "' has no goal cell");
  }
  return task;
}

LatentEmbedding LatentEmbedding::freeze(const nn::Mlp& params, const GoalTask& task,
                                        grid::ReprKind kind) {
  LatentEmbedding e;
  e.phi = eval::embed_all_states(params, task.spec, kind);
  e.goal = e.phi.row(static_cast<Eigen::Index>(task.goal.index)).transpose();
  return e;
}

double LatentEmbedding::distance_to_goal(std::size_t state) const {
  return (phi.row(static_cast<Eigen::Index>(state)).transpose() - goal).norm();
}

double LatentEmbedding::distance(std::size_t a, std::size_t b) const {
  return (phi.row(static_cast<Eigen::Index>(a)) - phi.row(static_cast<Eigen::Index>(b))).norm();
}

repr::LapRepConfig pretrain_config(std::uint64_t seed, std::size_t steps) {
  repr::LapRepConfig c;
  c.d = 20;
  c.beta = 5.0;
  c.delta_scale = 0.05;
  c.lambda = 0.9;
  c.batch = 128;
  c.lr = 1e-3;
  c.steps = steps;
  c.seed = seed;
  c.hidden = std::vector<std::size_t>{256, 256, 256};
  return c;
}

LatentEmbedding pretrain_embedding(const GoalTask& task, const replay::ReplayBuffer& buffer,
                                   const repr::LapRepConfig& config) {
  const auto trained = repr::train_repr(config, buffer, task.spec, grid::ReprKind::Position);
  return LatentEmbedding::freeze(trained.params, task, grid::ReprKind::Position);
}

namespace {

double raw_distance(const GoalTask& task, grid::GridState s) {
  const auto a = grid::encode(task.spec, s, grid::ReprKind::Position);
  const auto b = grid::encode(task.spec, task.goal, grid::ReprKind::Position);
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

}  // namespace

double reward(RewardKind kind, grid::GridState s_next, const GoalTask& task,
              const LatentEmbedding* embedding) {
  const double sparse = task.success(s_next) ? 0.0 : -1.0;
  switch (kind) {
    case RewardKind::Sparse: return sparse;
    case RewardKind::L2Raw: return -raw_distance(task, s_next);
    case RewardKind::RawMix: return 0.5 * -raw_distance(task, s_next) + 0.5 * sparse;
    case RewardKind::Mix:
      if (embedding == nullptr) fail(ErrorCode::MissingEmbedding, "mix reward needs an embedding");
      return 0.5 * -embedding->distance_to_goal(s_next.index) + 0.5 * sparse;
  }
  return sparse;
}

void write_heatmap(const std::filesystem::path& path, const GoalTask& task,
                   const LatentEmbedding& embedding, std::string_view config_hash) {
  csv::Writer w(path, config_hash);
  std::vector<std::string> header;
  for (int x = 0; x < task.spec.width(); ++x) header.push_back("x" + std::to_string(x));
  w.header(header);
  for (int y = 0; y < task.spec.height(); ++y) {
    std::vector<std::string> row;
    for (int x = 0; x < task.spec.width(); ++x) {
      const auto idx = task.spec.index_of({x, y});
      row.push_back(idx ? csv::format_double(embedding.distance_to_goal(*idx)) : "");
    }
    w.row(row);
  }
}

}  // namespace laprep::shaping
