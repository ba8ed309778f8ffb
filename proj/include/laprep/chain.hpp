#pragma once

// Exact analysis of the uniform-policy Markov chain on a maze: transition
// matrix, stationary distribution, discounted transitions, the symmetric
// affinity operator and the Laplacian quadratic form, plus the dense
// generalized eigendecomposition that serves as ground truth.

#include <cstddef>
#include <filesystem>
#include <string_view>

#include <Eigen/Dense>

#include "laprep/gridworld.hpp"

namespace laprep::chain {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// P(u, v) = (1/4) #{a : step(u, a) = v}.
Matrix transition_matrix(const grid::GridSpec& spec);

/// (1 - delta) P + delta * 1 * start^T. `start` must be a distribution.
Matrix reset_augmented(const Matrix& p, double delta, const Vector& start);

/// Power iteration on the lazy chain (I + P^T)/2 with L1 renormalisation.
/// Returns rho with ||rho^T P - rho^T||_1 < tol; throws NoStationary after
/// `max_iterations`.
Vector stationary(const Matrix& p, double tol = 1e-13, std::size_t max_iterations = 1'000'000);

/// (1 - lambda) P (I - lambda P)^{-1}, the geometric mixture of P^tau.
Matrix discounted_matrix(const Matrix& p, double lambda);

/// D(u, v) = P_l(u, v) / (2 rho(v)) + P_l(v, u) / (2 rho(u)); symmetric by
/// construction.
Matrix affinity_matrix(const Matrix& p_lambda, const Vector& rho);

struct QuadraticForm {
  Matrix m;  // W - W D W
  Vector w;  // diagonal of W = rho
};

QuadraticForm quadratic_form(const Matrix& dm, const Vector& rho);

struct EigenResult {
  Vector values;     // ascending
  Matrix functions;  // |S| x d, column k is f_k, W-orthonormal
};

/// Full generalized spectrum of (M, W) via Jacobi on W^{-1/2} M W^{-1/2}.
/// Each column's largest-magnitude entry is positive (lowest index wins
/// ties); near-equal eigenvalues are ordered by their first differing
/// component.
EigenResult eig_full(const Matrix& m, const Vector& w);

/// The d smallest pairs of eig_full. Throws RankExceeded when d > |S|.
EigenResult eig_smallest(const Matrix& m, const Vector& w, std::size_t d);
EigenResult leading(const EigenResult& full, std::size_t d);

/// Sum of the eigenvalues in `result`.
double optimal_value(const EigenResult& result);

/// sum_k phi_k^T M phi_k over the columns of phi.
double exact_objective(const Matrix& phi, const Matrix& m);

struct ChainOptions {
  double lambda = 0.0;
  /// Use the reset-augmented chain with delta = 1 / episode_length and a
  /// uniform restart distribution.
  bool reset = false;
  std::size_t episode_length = 50;
};

/// All exact quantities for one maze and one lambda. Immutable once built.
struct ChainModel {
  Matrix p;
  Vector rho;
  double lambda = 0.0;
  Matrix p_lambda;
  Matrix dm;
  Matrix m;
  Vector w;
  EigenResult spectrum;  // full, ascending

  static ChainModel build(const grid::GridSpec& spec, const ChainOptions& options = {});

  std::size_t num_states() const { return static_cast<std::size_t>(p.rows()); }
  EigenResult smallest(std::size_t d) const;
  /// Sum of the `count` largest eigenvalues.
  double top_sum(std::size_t count) const;
};

/// Writes P.csv, rho.csv, D.csv, eigenvalues.csv and eigenfunctions.csv.
void export_csv(const ChainModel& model, std::size_t d, const std::filesystem::path& dir,
                std::string_view config_hash);

}  // namespace laprep::chain
