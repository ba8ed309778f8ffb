#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "laprep/chain.hpp"
#include "laprep/checkpoint.hpp"
#include "laprep/csv.hpp"
#include "laprep/dqn.hpp"
#include "laprep/error.hpp"
#include "laprep/eval.hpp"
#include "laprep/pipeline.hpp"
#include "laprep/replay.hpp"
#include "laprep/rng.hpp"
#include "laprep/shaping.hpp"
#include "laprep/trainer.hpp"

namespace laprep::cli {
namespace {

namespace fs = std::filesystem;

// Raised while turning parsed options into validated settings.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out;
}

void report(std::string_view code, std::string_view message) {
  std::cerr << "error code=" << code << " message=\"" << escape(message) << "\"\n";
}

struct Common {
  std::string maze;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
};

void add_common(CLI::App* sub, Common& c, bool needs_maze = true) {
  auto* maze = sub->add_option("--maze", c.maze, "Maze file (ASCII, '#' walls)");
  if (needs_maze) maze->required();
  sub->add_option("--seed", c.seed, "Run seed");
  sub->add_option("--out-dir", c.out_dir, "Output directory");
}

struct ReprOptions {
  std::string repr = "index";
  std::size_t d = 20;
  std::optional<double> beta;
  double delta = 1.0;
  double lambda = 0.0;
  std::size_t batch = 32;
  std::size_t steps = 100'000;
  double lr = 1e-3;
  std::size_t log_interval = 1000;
  std::vector<std::size_t> hidden;
  std::size_t transitions = 100'000;
  std::string buffer;
};

void add_repr_options(CLI::App* sub, ReprOptions& r) {
  sub->add_option("--repr", r.repr, "State representation: index or position");
  sub->add_option("--d", r.d, "Embedding dimension");
  sub->add_option("--beta", r.beta, "Penalty weight (default d/20)");
  sub->add_option("--delta", r.delta, "Diagonal target of the orthonormality penalty");
  sub->add_option("--lambda", r.lambda, "Discount of the positive-pair sampler");
  sub->add_option("--batch", r.batch, "Pairs per step");
  sub->add_option("--steps", r.steps, "Adam steps");
  sub->add_option("--lr", r.lr, "Learning rate");
  sub->add_option("--log-interval", r.log_interval, "Steps per log record");
  sub->add_option("--hidden", r.hidden, "Hidden layer sizes")->delimiter(',');
  sub->add_option("--transitions", r.transitions, "Transitions to collect when no buffer is given");
  sub->add_option("--buffer", r.buffer, "Replay buffer CSV from `collect`");
}

repr::LapRepConfig to_config(const ReprOptions& r, std::uint64_t seed) {
  repr::LapRepConfig c;
  c.d = r.d;
  c.beta = r.beta;
  c.delta_scale = r.delta;
  c.lambda = r.lambda;
  c.batch = r.batch;
  c.steps = r.steps;
  c.lr = r.lr;
  c.seed = seed;
  c.log_interval = r.log_interval;
  if (!r.hidden.empty()) c.hidden = r.hidden;
  return c;
}

grid::GridSpec load_maze(const std::string& path) { return grid::GridSpec::load(path); }

replay::ReplayBuffer obtain_buffer(const grid::GridSpec& spec, const ReprOptions& r, std::uint64_t seed) {
  if (!r.buffer.empty()) {
    auto buffer = replay::ReplayBuffer::load_csv(r.buffer);
    buffer.validate(spec);
    return buffer;
  }
  return pipeline::buffer_for(spec, r.transitions, seed);
}

// Resolved configuration of the selected subcommand, as written next to the
// outputs, and its hash. Paths that only choose where outputs go are left out
// of the hash; input files enter it through their contents.
struct Resolved {
  std::string text;
  std::string hash;
};

std::string option_value(const CLI::Option* opt) {
  if (opt->get_expected_max() == 0) return opt->count() > 0 && opt->as<bool>() ? "true" : "false";
  if (opt->count() == 0) return opt->get_default_str();
  std::string joined;
  for (const auto& v : opt->results()) joined += (joined.empty() ? "" : ",") + v;
  return joined;
}

// An INI section that feeds back into --config.
Resolved resolve(const CLI::App& sub) {
  Resolved r;
  r.text = "[" + sub.get_name() + "]\n";
  std::string hashed = r.text;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string key = opt->get_single_name();
    if (key == "help" || key.empty()) continue;
    const std::string value = option_value(opt);
    r.text += key + "=\"" + value + "\"\n";
    if (key == "out-dir") continue;
    if (key == "maze" || key == "checkpoint" || key == "buffer") {
      std::ifstream file(value, std::ios::binary);
      std::ostringstream bytes;
      bytes << file.rdbuf();
      hashed += key + "#" + csv::hash_hex(fnv1a64(bytes.str())) + "\n";
    } else {
      hashed += key + "=" + value + "\n";
    }
  }
  r.hash = csv::hash_hex(fnv1a64(hashed));
  return r;
}

fs::path prepare_out(const Common& c, const Resolved& resolved, std::string_view sub) {
  const fs::path dir = c.out_dir;
  fs::create_directories(dir);
  std::ofstream out(csv::versioned_path(dir / (std::string(sub) + ".resolved.ini")));
  out << "# config_hash=" << resolved.hash << '\n' << resolved.text;
  if (!out) fail(ErrorCode::Io, "cannot write resolved config in " + dir.string());
  return dir;
}

grid::ReprKind repr_kind(const std::string& name) {
  try {
    return grid::parse_repr(name);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Laplacian representation learning on gridworlds"};
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.set_config("--config", "", "INI configuration file");
  app.allow_config_extras(false);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  Common common;
  ReprOptions ro;

  // collect
  std::size_t collect_transitions = 10'000;
  std::size_t episode_length = pipeline::kEpisodeLength;
  auto* collect = app.add_subcommand("collect", "Uniform-policy replay buffer");
  add_common(collect, common);
  collect->add_option("--transitions", collect_transitions, "Minimum number of transitions");
  collect->add_option("--episode-length", episode_length, "Steps per episode");

  // exact
  std::size_t exact_d = 20;
  double exact_lambda = 0.0;
  bool exact_reset = false;
  auto* exact = app.add_subcommand("exact", "Exact chain quantities and Laplacian eigenpairs");
  add_common(exact, common);
  exact->add_option("--d", exact_d, "Number of eigenpairs");
  exact->add_option("--lambda", exact_lambda, "Discount of the transition mixture");
  exact->add_flag("--reset", exact_reset, "Use the reset-augmented chain");
  exact->add_option("--episode-length", episode_length, "Episode length of the reset chain");

  // train-repr
  auto* train = app.add_subcommand("train-repr", "Train an embedding with the penalized objective");
  add_common(train, common);
  add_repr_options(train, ro);

  // eval-repr
  std::string checkpoint;
  std::string eval_method = "graph-drawing";
  std::string results = "results.csv";
  std::size_t eval_n = 0;
  auto* evalc = app.add_subcommand("eval-repr", "Objective gap of a trained embedding");
  add_common(evalc, common);
  evalc->add_option("--repr", ro.repr, "State representation: index or position");
  evalc->add_option("--checkpoint", checkpoint, "Network checkpoint")->required();
  evalc->add_option("--lambda", ro.lambda, "Discount of the evaluation chain");
  evalc->add_option("--transitions", eval_n, "Training transitions, recorded in the results");
  evalc->add_option("--method", eval_method, "Method label for the results row");
  evalc->add_option("--results", results, "Results file name inside the output directory");

  // baseline
  auto* base = app.add_subcommand("baseline", "Stacked-transitions eigenoptions baseline");
  add_common(base, common);
  base->add_option("--repr", ro.repr, "State representation: index or position");
  base->add_option("--d", ro.d, "Embedding dimension");
  base->add_option("--lambda", ro.lambda, "Discount of the evaluation chain");
  base->add_option("--transitions", ro.transitions, "Transitions to collect when no buffer is given");
  base->add_option("--buffer", ro.buffer, "Replay buffer CSV from `collect`");
  base->add_option("--results", results, "Results file name inside the output directory");

  // train-agent
  std::string reward_kind = "sparse";
  shaping::DqnConfig dqn;
  std::size_t pretrain_steps = 30'000;
  std::size_t pretrain_transitions = 100'000;
  std::vector<int> goal_xy;
  std::string curves = "curves.csv";
  auto* agent = app.add_subcommand("train-agent", "DQN on a goal-reaching task with a shaped reward");
  add_common(agent, common);
  agent->add_option("--reward", reward_kind, "sparse, l2, rawmix or mix");
  agent->add_option("--env-steps", dqn.total_steps, "Environment steps");
  agent->add_option("--epsilon", dqn.epsilon, "Exploration rate");
  agent->add_option("--discount", dqn.discount, "Reward discount");
  agent->add_option("--lr", dqn.lr, "Learning rate");
  agent->add_option("--batch", dqn.batch, "Minibatch size");
  agent->add_option("--learning-starts", dqn.learning_starts, "Steps before the first update");
  agent->add_option("--eval-interval", dqn.eval_interval, "Env steps between evaluations");
  agent->add_option("--eval-episodes", dqn.eval_episodes, "Greedy episodes per evaluation");
  agent->add_option("--pretrain-steps", pretrain_steps, "Embedding pretraining steps (mix)");
  agent->add_option("--pretrain-transitions", pretrain_transitions, "Embedding pretraining transitions (mix)");
  agent->add_option("--goal", goal_xy, "Goal cell x,y (default: the maze's G)")->delimiter(',')->expected(2);
  agent->add_option("--results", curves, "Curve file name inside the output directory");

  // sweep-beta
  std::vector<double> betas{0.1, 0.5, 1.0, 2.0, 5.0};
  std::vector<std::uint64_t> seeds;
  auto* sweep = app.add_subcommand("sweep-beta", "Objective gap across penalty weights");
  add_common(sweep, common);
  add_repr_options(sweep, ro);
  sweep->add_option("--betas", betas, "Penalty weights")->delimiter(',');
  sweep->add_option("--seeds", seeds, "Seeds (default: --seed)")->delimiter(',');
  sweep->add_option("--results", results, "Results file name inside the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report("BadConfig", e.what());
    return 2;
  }

  std::function<void()> job;
  Resolved resolved;
  try {
    resolved = resolve(*app.get_subcommands().front());
    if (*collect) {
      if (episode_length == 0) throw ConfigError("episode length must be positive");
      job = [&] {
        const auto spec = load_maze(common.maze);
        const auto dir = prepare_out(common, resolved, "collect");
        const auto buffer = replay::collect(spec, replay::episodes_for(collect_transitions, episode_length),
                                            episode_length, common.seed);
        buffer.save_csv(csv::versioned_path(dir / "buffer.csv"), resolved.hash);
      };
    } else if (*exact) {
      if (!(exact_lambda >= 0.0 && exact_lambda < 1.0)) throw ConfigError("lambda must lie in [0, 1)");
      job = [&] {
        const auto spec = load_maze(common.maze);
        const auto dir = prepare_out(common, resolved, "exact");
        const auto model = chain::ChainModel::build(spec, {exact_lambda, exact_reset, episode_length});
        chain::export_csv(model, exact_d, dir, resolved.hash);
      };
    } else if (*train) {
      const auto kind = repr_kind(ro.repr);
      const auto config = to_config(ro, common.seed);
      try {
        config.validate();
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      job = [&, kind, config] {
        const auto spec = load_maze(common.maze);
        const auto dir = prepare_out(common, resolved, "train-repr");
        const auto buffer = obtain_buffer(spec, ro, common.seed);
        const auto trained = repr::train_repr(config, buffer, spec, kind);
        nn::save_checkpoint(trained.params, csv::versioned_path(dir / "repr.ckpt"));
        trained.log.save_csv(csv::versioned_path(dir / "train_log.csv"), resolved.hash);
        trained.log.save_timing(csv::versioned_path(dir / "train_log.timing.csv"), resolved.hash);
      };
    } else if (*evalc) {
      const auto kind = repr_kind(ro.repr);
      if (!(ro.lambda >= 0.0 && ro.lambda < 1.0)) throw ConfigError("lambda must lie in [0, 1)");
      job = [&, kind] {
        const auto spec = load_maze(common.maze);
        const auto dir = prepare_out(common, resolved, "eval-repr");
        const auto net = nn::load_checkpoint(checkpoint);
        const auto model = chain::ChainModel::build(spec, {ro.lambda});
        auto report = eval::objective_gap(eval::embed_all_states(net, spec, kind), model);
        report.method = eval_method;
        report.n_transitions = eval_n;
        eval::append_results(dir / results, report, spec.name(), kind, common.seed, resolved.hash);
      };
    } else if (*base) {
      const auto kind = repr_kind(ro.repr);
      if (ro.d < 1) throw ConfigError("d must be >= 1");
      if (!(ro.lambda >= 0.0 && ro.lambda < 1.0)) throw ConfigError("lambda must lie in [0, 1)");
      job = [&, kind] {
        const auto spec = load_maze(common.maze);
        const auto dir = prepare_out(common, resolved, "baseline");
        const auto buffer = obtain_buffer(spec, ro, common.seed);
        const auto model = chain::ChainModel::build(spec, {ro.lambda});
        auto report = eval::baseline_report(eval::eigenoptions_baseline(buffer, spec, kind, ro.d), model);
        report.n_transitions = buffer.total_transitions();
        eval::append_results(dir / results, report, spec.name(), kind, common.seed, resolved.hash);
      };
    } else if (*agent) {
      shaping::RewardKind kind;
      try {
        kind = shaping::parse_reward(reward_kind);
        dqn.seed = common.seed;
        dqn.validate();
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      job = [&, kind] {
        const auto spec = load_maze(common.maze);
        std::optional<grid::Cell> goal;
        if (goal_xy.size() == 2) goal = grid::Cell{goal_xy[0], goal_xy[1]};
        const auto task = shaping::GoalTask::from_spec(spec, goal);
        const auto dir = prepare_out(common, resolved, "train-agent");
        std::optional<shaping::LatentEmbedding> embedding;
        if (kind == shaping::RewardKind::Mix) {
          const auto buffer = pipeline::buffer_for(spec, pretrain_transitions, common.seed);
          const auto config = shaping::pretrain_config(common.seed, pretrain_steps);
          const auto trained = repr::train_repr(config, buffer, spec, grid::ReprKind::Position);
          nn::save_checkpoint(trained.params, csv::versioned_path(dir / "embedding.ckpt"));
          embedding = shaping::LatentEmbedding::freeze(trained.params, task, grid::ReprKind::Position);
          shaping::write_heatmap(csv::versioned_path(dir / "heatmap.csv"), task, *embedding, resolved.hash);
        }
        const auto result = shaping::dqn_train(task, kind, dqn, embedding ? &*embedding : nullptr);
        nn::save_checkpoint(result.online, csv::versioned_path(dir / "agent.ckpt"));
        shaping::append_curve(dir / curves, result.curve, common.seed, kind, spec.name(), resolved.hash);
      };
    } else if (*sweep) {
      const auto kind = repr_kind(ro.repr);
      if (betas.empty()) throw ConfigError("at least one beta is required");
      if (seeds.empty()) seeds.push_back(common.seed);
      try {
        for (double b : betas) {
          auto c = to_config(ro, 0);
          c.beta = b;
          c.validate();
        }
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      job = [&, kind] {
        const auto spec = load_maze(common.maze);
        const auto dir = prepare_out(common, resolved, "sweep-beta");
        const auto model = chain::ChainModel::build(spec, {ro.lambda});
        csv::Writer sweep_out(csv::versioned_path(dir / "beta_sweep.csv"), resolved.hash);
        sweep_out.header({"beta", "seed", "gap", "effective_rank"});
        for (double b : betas) {
          for (auto seed : seeds) {
            auto config = to_config(ro, seed);
            config.beta = b;
            const auto run = pipeline::train_and_evaluate(spec, kind, config, ro.transitions, model);
            sweep_out.row({csv::format_double(b), std::to_string(seed), csv::format_double(run.report.gap),
                           std::to_string(run.report.effective_rank)});
            eval::append_results(dir / results, run.report, spec.name(), kind, seed, resolved.hash);
          }
        }
      };
    }
  } catch (const ConfigError& e) {
    report("BadConfig", e.what());
    return 2;
  } catch (const Error& e) {
    report(error_code_name(e.code()), e.what());
    return 2;
  }

  try {
    job();
  } catch (const Error& e) {
    report(error_code_name(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    report("Internal", e.what());
    return 1;
  }
  return 0;
}

}  // namespace laprep::cli
