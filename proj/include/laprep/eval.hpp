#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "laprep/chain.hpp"
#include "laprep/gridworld.hpp"
#include "laprep/mlp.hpp"
#include "laprep/replay.hpp"

namespace laprep::eval {

using chain::Matrix;
using chain::Vector;

struct EvalReport {
  std::string method;
  std::size_t d = 0;
  std::size_t n_transitions = 0;
  double projected = 0.0;
  double optimal = 0.0;
  double gap = 0.0;
  std::size_t effective_rank = 0;
};

/// Row s is forward(encode(s)).
Matrix embed_all_states(const nn::Mlp& params, const grid::GridSpec& spec, grid::ReprKind kind);

struct Projection {
  Matrix basis;  // |S| x rank, W-orthonormal columns
  std::size_t rank = 0;
};

/// W-orthonormal basis of span(phi) from the SVD of W^{1/2} phi. Singular
/// values below rel_tol * sigma_max are dropped.
Projection project_orthonormal(const Matrix& phi, const Vector& rho, double rel_tol = 1e-9);

/// Objective of the projected basis minus the optimum for d = phi.cols().
/// Directions lost to rank deficiency are charged the largest eigenvalues.
EvalReport objective_gap(const Matrix& phi, const chain::ChainModel& model);

/// Candidate embeddings from the right singular vectors of the unique stacked
/// transition differences psi(s') - psi(s). Columns beyond the feature
/// dimension are zero.
struct Baseline {
  Matrix ascending;   // smallest singular values first
  Matrix descending;  // largest first
  std::size_t unique_rows = 0;
};

Baseline eigenoptions_baseline(const replay::ReplayBuffer& buffer, const grid::GridSpec& spec,
                               grid::ReprKind kind, std::size_t d);

/// Evaluates both orderings and keeps the smaller gap.
EvalReport baseline_report(const Baseline& baseline, const chain::ChainModel& model);

/// One row per report: method,maze,repr,d,n,seed,gap,effective_rank,config_hash.
void append_results(const std::filesystem::path& path, const EvalReport& report, std::string_view maze,
                    grid::ReprKind kind, std::uint64_t seed, std::string_view config_hash);

}  // namespace laprep::eval
