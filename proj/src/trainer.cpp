#include "laprep/trainer.hpp"

#include <chrono>

#include "laprep/csv.hpp"
#include "laprep/error.hpp"
#include "laprep/kernels.hpp"

namespace laprep::repr {

void LapRepConfig::validate() const {
  if (d < 1) fail(ErrorCode::InvalidArgument, "d must be >= 1");
  if (effective_beta() < 0.0) fail(ErrorCode::InvalidArgument, "beta must be >= 0");
  if (!(delta_scale > 0.0 && delta_scale <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "delta_scale must lie in (0, 1]");
  }
  if (!(lambda >= 0.0 && lambda < 1.0)) fail(ErrorCode::InvalidArgument, "lambda must lie in [0, 1)");
  if (batch < 1) fail(ErrorCode::InvalidArgument, "batch must be >= 1");
  if (!(lr > 0.0)) fail(ErrorCode::InvalidArgument, "lr must be positive");
  if (log_interval < 1) fail(ErrorCode::InvalidArgument, "log interval must be >= 1");
}

nn::Architecture default_architecture(const grid::GridSpec& spec, grid::ReprKind kind,
                                      const LapRepConfig& config) {
  nn::Architecture arch;
  arch.input = grid::feature_dim(spec, kind);
  arch.output = config.d;
  if (config.hidden) {
    arch.hidden = *config.hidden;
  } else if (kind == grid::ReprKind::Position) {
    arch.hidden = {200, 200};
  }
  return arch;
}

void TrainLog::save_csv(const std::filesystem::path& path, std::string_view config_hash) const {
  csv::Writer w(path, config_hash);
  w.header({"step", "attractive", "repulsive", "total"});
  for (const auto& r : records) {
    w.row({std::to_string(r.step), csv::format_double(r.attractive), csv::format_double(r.repulsive),
           csv::format_double(r.total)});
  }
}

void TrainLog::save_timing(const std::filesystem::path& path, std::string_view config_hash) const {
  csv::Writer w(path, config_hash);
  w.header({"step", "wall_seconds"});
  for (const auto& r : records) w.row({std::to_string(r.step), csv::format_double(r.wall_seconds)});
}

nn::RowMatrix feature_table(const grid::GridSpec& spec, grid::ReprKind kind) {
  const auto dim = grid::feature_dim(spec, kind);
  nn::RowMatrix table(static_cast<Eigen::Index>(spec.num_states()), static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < spec.num_states(); ++s) {
    grid::encode_into(spec, spec.state(s), kind, {table.data() + s * dim, dim});
  }
  return table;
}

nn::RowMatrix gather_rows(const nn::RowMatrix& table, const std::vector<replay::StateIndex>& indices) {
  nn::RowMatrix out(static_cast<Eigen::Index>(indices.size()), table.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= static_cast<std::size_t>(table.rows())) {
      fail(ErrorCode::InvalidArgument, "state index out of range");
    }
    out.row(static_cast<Eigen::Index>(i)) = table.row(indices[i]);
  }
  return out;
}

PairBatch sample_batch(const replay::ReplayBuffer& buffer, const LapRepConfig& config, Rng& rng) {
  PairBatch batch;
  batch.u.reserve(config.batch);
  batch.v.reserve(config.batch);
  batch.u_neg.reserve(config.batch);
  batch.w.reserve(config.batch);
  for (std::size_t i = 0; i < config.batch; ++i) {
    const auto pair = replay::sample_pair(buffer, config.lambda, rng);
    batch.u.push_back(pair.u);
    batch.v.push_back(pair.v);
  }
  for (std::size_t i = 0; i < config.batch; ++i) {
    if (config.reuse_negative_u) {
      batch.u_neg.push_back(batch.u[i]);
      batch.w.push_back(replay::sample_state(buffer, rng));
    } else {
      const auto [a, b] = replay::sample_negative_pair(buffer, rng);
      batch.u_neg.push_back(a);
      batch.w.push_back(b);
    }
  }
  return batch;
}

LossResult total_loss(const nn::Mlp& net, const nn::RowMatrix& features, const PairBatch& batch,
                      const LapRepConfig& config) {
  const auto pos = static_cast<Eigen::Index>(batch.u.size());
  const auto neg = static_cast<Eigen::Index>(batch.u_neg.size());
  if (batch.v.size() != batch.u.size() || batch.w.size() != batch.u_neg.size() || pos == 0 || neg == 0) {
    fail(ErrorCode::ShapeMismatch, "malformed pair batch");
  }
  std::vector<replay::StateIndex> stacked;
  stacked.reserve(static_cast<std::size_t>(2 * pos + 2 * neg));
  stacked.insert(stacked.end(), batch.u.begin(), batch.u.end());
  stacked.insert(stacked.end(), batch.v.begin(), batch.v.end());
  stacked.insert(stacked.end(), batch.u_neg.begin(), batch.u_neg.end());
  stacked.insert(stacked.end(), batch.w.begin(), batch.w.end());

  nn::Tape tape;
  const nn::RowMatrix out = net.forward(gather_rows(features, stacked), tape);
  const auto d = out.cols();
  const nn::RowMatrix pu = out.topRows(pos);
  const nn::RowMatrix pv = out.middleRows(pos, pos);
  const nn::RowMatrix pun = out.middleRows(2 * pos, neg);
  const nn::RowMatrix pw = out.bottomRows(neg);

  EmbeddingGradients eg;
  LossResult result;
  result.terms = loss_with_gradients(pu, pv, pun, pw, config.effective_beta(), config.delta_scale, &eg);

  nn::RowMatrix upstream(out.rows(), d);
  upstream.topRows(pos) = eg.du;
  upstream.middleRows(pos, pos) = eg.dv;
  upstream.middleRows(2 * pos, neg) = eg.du_neg;
  upstream.bottomRows(neg) = eg.dw;
  result.grads = net.backward(tape, upstream);
  return result;
}

TrainResult train_repr(const LapRepConfig& config, const replay::ReplayBuffer& buffer,
                       const grid::GridSpec& spec, grid::ReprKind kind) {
  config.validate();
  TrainResult result{nn::Mlp::init(default_architecture(spec, kind, config), config.seed), {}};
  if (config.steps == 0) return result;
  if (buffer.empty()) fail(ErrorCode::EmptyBuffer, "cannot train on an empty buffer");

  const simd::ScopedFlushDenormals flush;
  const nn::RowMatrix features = feature_table(spec, kind);
  auto adam = nn::AdamState::for_network(result.params, nn::AdamConfig{config.lr});
  Rng rng = make_stream(config.seed, "train");
  const auto start = std::chrono::steady_clock::now();

  LossTerms acc;
  std::size_t in_interval = 0;
  for (std::size_t step = 1; step <= config.steps; ++step) {
    const PairBatch batch = sample_batch(buffer, config, rng);
    const LossResult loss = total_loss(result.params, features, batch, config);
    nn::adam_step(result.params, loss.grads, adam);

    acc.attractive += loss.terms.attractive;
    acc.repulsive += loss.terms.repulsive;
    acc.total += loss.terms.total;
    ++in_interval;
    if (step % config.log_interval == 0 || step == config.steps) {
      const double n = static_cast<double>(in_interval);
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      result.log.records.push_back(
          {step, acc.attractive / n, acc.repulsive / n, acc.total / n, elapsed.count()});
      acc = {};
      in_interval = 0;
    }
  }
  return result;
}

}  // namespace laprep::repr
