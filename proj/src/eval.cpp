#include "laprep/eval.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "laprep/csv.hpp"
#include "laprep/error.hpp"
#include "laprep/trainer.hpp"

namespace laprep::eval {

Matrix embed_all_states(const nn::Mlp& params, const grid::GridSpec& spec, grid::ReprKind kind) {
  const nn::RowMatrix out = params.forward(repr::feature_table(spec, kind));
  return Matrix(out);
}

Projection project_orthonormal(const Matrix& phi, const Vector& rho, double rel_tol) {
  if (phi.rows() != rho.size()) fail(ErrorCode::ShapeMismatch, "phi rows must match rho");
  if ((rho.array() <= 0.0).any()) fail(ErrorCode::UnreachableState, "rho must be positive");
  const Vector sqrt_w = rho.array().sqrt();
  const Matrix scaled = sqrt_w.asDiagonal() * phi;

  Projection out;
  if (phi.cols() == 0 || !scaled.allFinite()) {
    out.basis = Matrix(phi.rows(), 0);
    return out;
  }
  Eigen::BDCSVD<Matrix> svd(scaled, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  const double top = sigma.size() > 0 ? sigma(0) : 0.0;
  std::size_t rank = 0;
  if (top > 0.0) {
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
      if (sigma(i) > rel_tol * top) ++rank;
    }
  }
  const auto r = static_cast<Eigen::Index>(rank);
  out.rank = rank;
  out.basis = sqrt_w.cwiseInverse().asDiagonal() * svd.matrixU().leftCols(r);
  return out;
}

EvalReport objective_gap(const Matrix& phi, const chain::ChainModel& model) {
  const auto d = static_cast<std::size_t>(phi.cols());
  EvalReport report;
  report.d = d;
  report.optimal = chain::optimal_value(model.smallest(d));
  const Projection proj = project_orthonormal(phi, model.rho);
  report.effective_rank = proj.rank;
  report.projected = chain::exact_objective(proj.basis, model.m) + model.top_sum(d - proj.rank);
  report.gap = report.projected - report.optimal;
  return report;
}

Baseline eigenoptions_baseline(const replay::ReplayBuffer& buffer, const grid::GridSpec& spec,
                               grid::ReprKind kind, std::size_t d) {
  const auto features = repr::feature_table(spec, kind);
  const auto f = static_cast<std::size_t>(features.cols());

  std::set<std::pair<replay::StateIndex, replay::StateIndex>> transitions;
  for (std::size_t i = 0; i < buffer.num_trajectories(); ++i) {
    const auto traj = buffer.trajectory(i);
    for (std::size_t t = 0; t + 1 < traj.size(); ++t) transitions.emplace(traj[t], traj[t + 1]);
  }
  // Keyed on a 1e-9 grid so equal moves in scaled coordinates collapse
  // despite rounding in the encoding.
  std::map<std::vector<long long>, std::vector<double>> unique;
  for (const auto& [s, s2] : transitions) {
    std::vector<double> diff(f);
    std::vector<long long> key(f);
    for (std::size_t j = 0; j < f; ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      diff[j] = features(s2, col) - features(s, col);
      key[j] = std::llround(diff[j] * 1e9);
    }
    unique.emplace(std::move(key), std::move(diff));
  }

  // Right singular vectors of T are the eigenvectors of T^T T.
  Matrix gram = Matrix::Zero(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(f));
  for (const auto& [key, r] : unique) {
    const Eigen::Map<const Vector> v(r.data(), static_cast<Eigen::Index>(f));
    gram.noalias() += v * v.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) fail(ErrorCode::NumericalFailure, "baseline eigensolver failed");
  const Matrix& vecs = eig.eigenvectors();  // ascending eigenvalues

  const auto keep = static_cast<Eigen::Index>(std::min(d, f));
  Matrix asc = Matrix::Zero(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(d));
  Matrix desc = asc;
  asc.leftCols(keep) = vecs.leftCols(keep);
  desc.leftCols(keep) = vecs.rightCols(keep).rowwise().reverse();

  const Matrix psi(features);
  Baseline out;
  out.ascending = psi * asc;
  out.descending = psi * desc;
  out.unique_rows = unique.size();
  return out;
}

EvalReport baseline_report(const Baseline& baseline, const chain::ChainModel& model) {
  EvalReport a = objective_gap(baseline.ascending, model);
  EvalReport b = objective_gap(baseline.descending, model);
  EvalReport best = b.gap < a.gap ? b : a;
  best.method = "eigenoptions";
  return best;
}

void append_results(const std::filesystem::path& path, const EvalReport& report, std::string_view maze,
                    grid::ReprKind kind, std::uint64_t seed, std::string_view config_hash) {
  csv::append_rows(path,
                   {"method", "maze", "repr", "d", "n", "seed", "gap", "effective_rank", "config_hash"},
                   {{report.method, std::string(maze), std::string(grid::repr_name(kind)),
                     std::to_string(report.d), std::to_string(report.n_transitions),
                     std::to_string(seed), csv::format_double(report.gap),
                     std::to_string(report.effective_rank), std::string(config_hash)}});
}

}  // namespace laprep::eval
