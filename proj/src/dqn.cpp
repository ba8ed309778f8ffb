#include "laprep/dqn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "laprep/adam.hpp"
#include "laprep/csv.hpp"
#include "laprep/error.hpp"
#include "laprep/kernels.hpp"
#include "laprep/rng.hpp"
#include "laprep/trainer.hpp"

namespace laprep::shaping {

void DqnConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) fail(ErrorCode::InvalidArgument, "epsilon must lie in [0, 1]");
  if (!(discount > 0.0 && discount < 1.0)) fail(ErrorCode::InvalidArgument, "discount must lie in (0, 1)");
  if (target_period < 1) fail(ErrorCode::InvalidArgument, "target period must be >= 1");
  if (!(target_rate > 0.0 && target_rate <= 1.0)) fail(ErrorCode::InvalidArgument, "target rate must lie in (0, 1]");
  if (batch < 1 || replay_capacity < 1 || train_every < 1) {
    fail(ErrorCode::InvalidArgument, "batch, replay capacity and train_every must be >= 1");
  }
  if (eval_interval < 1) fail(ErrorCode::InvalidArgument, "eval interval must be >= 1");
  if (!(lr > 0.0) || !(huber_delta > 0.0)) fail(ErrorCode::InvalidArgument, "lr and huber delta must be positive");
}

namespace {

constexpr std::size_t kNumActions = grid::kActions.size();

std::size_t greedy_action(const double* q, Rng& rng) {
  const double best = *std::max_element(q, q + kNumActions);
  std::array<std::size_t, kNumActions> ties{};
  std::size_t count = 0;
  for (std::size_t a = 0; a < kNumActions; ++a) {
    if (q[a] == best) ties[count++] = a;
  }
  return count == 1 ? ties[0] : ties[uniform_index(rng, count)];
}

grid::GridState start_state(const GoalTask& task, Rng& rng) {
  if (task.start) return *task.start;
  return task.spec.state(uniform_index(rng, task.spec.num_states()));
}

struct Transition {
  std::uint32_t s;
  std::uint32_t a;
  std::uint32_t s_next;
  double r;
};

// Fixed-capacity FIFO; oldest entries are overwritten.
class TransitionBuffer {
 public:
  explicit TransitionBuffer(std::size_t capacity) : capacity_(capacity) { items_.reserve(std::min(capacity, std::size_t{1} << 20)); }
  void push(const Transition& t) {
    if (items_.size() < capacity_) {
      items_.push_back(t);
    } else {
      items_[next_] = t;
    }
    next_ = (next_ + 1) % capacity_;
  }
  std::size_t size() const { return items_.size(); }
  const Transition& operator[](std::size_t i) const { return items_[i]; }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

double huber_grad(double diff, double delta) { return std::clamp(diff, -delta, delta); }

}  // namespace

double evaluate_policy(const nn::Mlp& params, const GoalTask& task, std::size_t episodes,
                       std::uint64_t seed) {
  if (episodes == 0) return 0.0;
  Rng rng = make_stream(seed, "eval");
  const nn::RowMatrix features = repr::feature_table(task.spec, grid::ReprKind::Position);
  const nn::RowMatrix q = params.forward(features);  // policy is fixed, so one table serves all steps
  if (static_cast<std::size_t>(q.cols()) != kNumActions) {
    fail(ErrorCode::ShapeMismatch, "Q-network must have one output per action");
  }
  std::size_t successes = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    grid::GridState s = start_state(task, rng);
    bool reached = task.success(s);
    for (std::size_t t = 0; t < task.episode_len && !reached; ++t) {
      const auto a = greedy_action(q.row(static_cast<Eigen::Index>(s.index)).data(), rng);
      s = grid::step(task.spec, s, grid::kActions[a]);
      reached = task.success(s);
    }
    if (reached) ++successes;
  }
  return static_cast<double>(successes) / static_cast<double>(episodes);
}

DqnResult dqn_train(const GoalTask& task, RewardKind kind, const DqnConfig& config,
                    const LatentEmbedding* embedding) {
  config.validate();
  if (kind == RewardKind::Mix && embedding == nullptr) {
    fail(ErrorCode::MissingEmbedding, "mix reward needs a pretrained embedding");
  }
  const simd::ScopedFlushDenormals flush;
  const nn::RowMatrix features = repr::feature_table(task.spec, grid::ReprKind::Position);
  const nn::Architecture arch{static_cast<std::size_t>(features.cols()), config.hidden, kNumActions};

  std::vector<double> rewards(task.spec.num_states());
  for (std::size_t s = 0; s < rewards.size(); ++s) {
    rewards[s] = reward(kind, task.spec.state(s), task, embedding);
  }

  DqnResult result{nn::Mlp::init(arch, config.seed), {}};
  nn::Mlp target = result.online;
  auto adam = nn::AdamState::for_network(result.online, nn::AdamConfig{config.lr});
  Rng env_rng = make_stream(config.seed, "env");
  Rng replay_rng = make_stream(config.seed, "replay");
  TransitionBuffer memory(config.replay_capacity);

  auto record = [&](std::size_t step) {
    result.curve.push_back(
        {step, evaluate_policy(result.online, task, config.eval_episodes, config.seed)});
  };
  record(0);

  const auto batch = static_cast<Eigen::Index>(config.batch);
  const auto in_dim = features.cols();
  nn::RowMatrix x(batch, in_dim);
  nn::RowMatrix x_next(batch, in_dim);
  nn::RowMatrix upstream(batch, static_cast<Eigen::Index>(kNumActions));
  std::vector<std::size_t> picks(config.batch);

  grid::GridState s = start_state(task, env_rng);
  std::size_t t_in_episode = 0;
  for (std::size_t step = 1; step <= config.total_steps; ++step) {
    std::size_t a;
    if (std::generate_canonical<double, 53>(env_rng) < config.epsilon) {
      a = uniform_index(env_rng, kNumActions);
    } else {
      const nn::RowMatrix q = result.online.forward(features.row(static_cast<Eigen::Index>(s.index)));
      a = greedy_action(q.data(), env_rng);
    }
    const grid::GridState s_next = grid::step(task.spec, s, grid::kActions[a]);
    memory.push({static_cast<std::uint32_t>(s.index), static_cast<std::uint32_t>(a),
                 static_cast<std::uint32_t>(s_next.index), rewards[s_next.index]});
    s = s_next;
    if (++t_in_episode == task.episode_len) {
      s = start_state(task, env_rng);
      t_in_episode = 0;
    }

    if (step >= config.learning_starts && step % config.train_every == 0) {
      for (Eigen::Index i = 0; i < batch; ++i) {
        picks[static_cast<std::size_t>(i)] = uniform_index(replay_rng, memory.size());
        const Transition& tr = memory[picks[static_cast<std::size_t>(i)]];
        x.row(i) = features.row(tr.s);
        x_next.row(i) = features.row(tr.s_next);
      }
      const nn::RowMatrix q_next = target.forward(x_next);
      nn::Tape tape;
      const nn::RowMatrix q = result.online.forward(x, tape);
      upstream.setZero();
      for (Eigen::Index i = 0; i < batch; ++i) {
        const Transition& tr = memory[picks[static_cast<std::size_t>(i)]];
        const double y = tr.r + config.discount * q_next.row(i).maxCoeff();
        upstream(i, tr.a) = huber_grad(q(i, tr.a) - y, config.huber_delta) / static_cast<double>(batch);
      }
      nn::adam_step(result.online, result.online.backward(tape, upstream), adam);
      if (step % config.target_period == 0) nn::soft_update(target, result.online, config.target_rate);
    }

    if (step % config.eval_interval == 0 || step == config.total_steps) record(step);
  }
  return result;
}

void append_curve(const std::filesystem::path& path, const std::vector<CurvePoint>& curve,
                  std::uint64_t seed, RewardKind kind, std::string_view maze,
                  std::string_view config_hash) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : curve) {
    rows.push_back({std::to_string(p.env_steps), csv::format_double(p.success_rate),
                    std::to_string(seed), std::string(reward_name(kind)), std::string(maze),
                    std::string(config_hash)});
  }
  csv::append_rows(path, {"env_steps", "success_rate", "seed", "kind", "maze", "config_hash"}, rows);
}

}  // namespace laprep::shaping
