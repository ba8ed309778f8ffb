#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "laprep/adam.hpp"
#include "laprep/gridworld.hpp"
#include "laprep/mlp.hpp"
#include "laprep/objective.hpp"
#include "laprep/replay.hpp"

namespace laprep::repr {

struct LapRepConfig {
  std::size_t d = 20;
  /// Penalty weight; d / 20 when unset.
  std::optional<double> beta;
  /// Diagonal target c of the orthonormality penalty.
  double delta_scale = 1.0;
  /// Discount of the positive-pair sampler.
  double lambda = 0.0;
  std::size_t batch = 32;
  std::size_t steps = 100'000;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::size_t log_interval = 1000;
  /// Reuse the positive batch's u as the negatives' first element.
  bool reuse_negative_u = false;
  /// Hidden layer sizes; empty selects the default for the representation
  /// (linear for index, 200-200 for position).
  std::optional<std::vector<std::size_t>> hidden;

  double effective_beta() const { return beta.value_or(static_cast<double>(d) / 20.0); }
  void validate() const;
};

nn::Architecture default_architecture(const grid::GridSpec& spec, grid::ReprKind kind,
                                      const LapRepConfig& config);

struct LogRecord {
  std::size_t step = 0;
  double attractive = 0.0;
  double repulsive = 0.0;
  double total = 0.0;
  double wall_seconds = 0.0;
};

struct TrainLog {
  std::vector<LogRecord> records;

  /// step,attractive,repulsive,total. Wall time is written separately by
  /// save_timing so metric files stay reproducible.
  void save_csv(const std::filesystem::path& path, std::string_view config_hash) const;
  void save_timing(const std::filesystem::path& path, std::string_view config_hash) const;
};

/// Raw features of every state, |S| x feature_dim.
nn::RowMatrix feature_table(const grid::GridSpec& spec, grid::ReprKind kind);

/// Rows of `table` selected by `indices`.
nn::RowMatrix gather_rows(const nn::RowMatrix& table, const std::vector<replay::StateIndex>& indices);

struct PairBatch {
  std::vector<replay::StateIndex> u;
  std::vector<replay::StateIndex> v;
  std::vector<replay::StateIndex> u_neg;
  std::vector<replay::StateIndex> w;
};

PairBatch sample_batch(const replay::ReplayBuffer& buffer, const LapRepConfig& config, Rng& rng);

struct LossResult {
  LossTerms terms;
  nn::Gradients grads;
};

/// Loss on one batch and its parameter gradients through forward(encode(.)).
LossResult total_loss(const nn::Mlp& net, const nn::RowMatrix& features, const PairBatch& batch,
                      const LapRepConfig& config);

struct TrainResult {
  nn::Mlp params;
  TrainLog log;
};

/// `steps` Adam updates of the penalized objective. Initialisation uses the
/// "init" substream of config.seed and sampling the "train" substream.
TrainResult train_repr(const LapRepConfig& config, const replay::ReplayBuffer& buffer,
                       const grid::GridSpec& spec, grid::ReprKind kind);

}  // namespace laprep::repr
