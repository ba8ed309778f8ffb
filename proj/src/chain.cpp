#include "laprep/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "laprep/csv.hpp"
#include "laprep/error.hpp"
#include "laprep/jacobi.hpp"

namespace laprep::chain {

Matrix transition_matrix(const grid::GridSpec& spec) {
  const auto n = static_cast<Eigen::Index>(spec.num_states());
  Matrix p = Matrix::Zero(n, n);
  const double share = 1.0 / static_cast<double>(grid::kNumActions);
  for (std::size_t u = 0; u < spec.num_states(); ++u) {
    for (grid::Action a : grid::kActions) {
      const auto v = grid::step(spec, spec.state(u), a).index;
      p(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) += share;
    }
  }
  return p;
}

Matrix reset_augmented(const Matrix& p, double delta, const Vector& start) {
  if (!(delta >= 0.0 && delta <= 1.0)) fail(ErrorCode::InvalidArgument, "reset delta must lie in [0, 1]");
  if (start.size() != p.rows()) fail(ErrorCode::ShapeMismatch, "start distribution size mismatch");
  Matrix out = (1.0 - delta) * p;
  out.rowwise() += delta * start.transpose();
  return out;
}

Vector stationary(const Matrix& p, double tol, std::size_t max_iterations) {
  if (p.rows() != p.cols() || p.rows() == 0) fail(ErrorCode::ShapeMismatch, "P must be square");
  const Eigen::Index n = p.rows();
  const Matrix pt = p.transpose();
  Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const Vector px = pt * x;
    if ((px - x).lpNorm<1>() < tol) return x;
    x = 0.5 * (x + px);
    x /= x.sum();
  }
  fail(ErrorCode::NoStationary, "power iteration did not converge");
}

Matrix discounted_matrix(const Matrix& p, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) fail(ErrorCode::InvalidArgument, "lambda must lie in [0, 1)");
  if (lambda == 0.0) return p;
  const Eigen::Index n = p.rows();
  const Matrix a = Matrix::Identity(n, n) - lambda * p;
  Eigen::PartialPivLU<Matrix> lu(a);
  Matrix inv = lu.solve(Matrix::Identity(n, n));
  if (!inv.allFinite()) fail(ErrorCode::LinearSolveFailed, "(I - lambda P) solve failed");
  const double residual = (a * inv - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (residual > 1e-8) fail(ErrorCode::LinearSolveFailed, "(I - lambda P) solve is inaccurate");
  return (1.0 - lambda) * p * inv;
}

Matrix affinity_matrix(const Matrix& p_lambda, const Vector& rho) {
  const Eigen::Index n = p_lambda.rows();
  if (p_lambda.cols() != n || rho.size() != n) fail(ErrorCode::ShapeMismatch, "affinity shape mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(rho(i) > 0.0)) {
      fail(ErrorCode::UnreachableState, "state " + std::to_string(i) + " has zero stationary mass");
    }
  }
  Matrix dm(n, n);
  for (Eigen::Index u = 0; u < n; ++u) {
    for (Eigen::Index v = u; v < n; ++v) {
      const double forward = 0.5 * p_lambda(u, v) / rho(v);
      const double backward = 0.5 * p_lambda(v, u) / rho(u);
      dm(u, v) = forward + backward;
      dm(v, u) = dm(u, v);
    }
  }
  return dm;
}

QuadraticForm quadratic_form(const Matrix& dm, const Vector& rho) {
  const Eigen::Index n = dm.rows();
  QuadraticForm q;
  q.w = rho;
  q.m.resize(n, n);
  for (Eigen::Index u = 0; u < n; ++u) {
    for (Eigen::Index v = u; v < n; ++v) {
      double value = -rho(u) * dm(u, v) * rho(v);
      if (u == v) value += rho(u);
      q.m(u, v) = value;
      q.m(v, u) = value;
    }
  }
  return q;
}

namespace {

void normalize_sign(Eigen::Ref<Vector> f) {
  Eigen::Index best = 0;
  double best_mag = -1.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double mag = std::abs(f(i));
    if (mag > best_mag * (1.0 + 1e-12) + 1e-300) {
      best_mag = mag;
      best = i;
    }
  }
  if (f(best) < 0.0) f = -f;
}

bool lexicographically_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a(i) - b(i)) > 1e-12) return a(i) < b(i);
  }
  return false;
}

}  // namespace

EigenResult eig_full(const Matrix& m, const Vector& w) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n || w.size() != n) fail(ErrorCode::ShapeMismatch, "eig_full shape mismatch");
  Vector inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(w(i) > 0.0)) fail(ErrorCode::UnreachableState, "weight must be positive");
    inv_sqrt(i) = 1.0 / std::sqrt(w(i));
  }
  Matrix a = inv_sqrt.asDiagonal() * m * inv_sqrt.asDiagonal();
  a = 0.5 * (a + a.transpose());  // exact symmetry for the rotations
  const SymmetricEigen sym = jacobi_eigen(std::move(a));

  Matrix functions = inv_sqrt.asDiagonal() * sym.vectors;
  for (Eigen::Index k = 0; k < n; ++k) normalize_sign(functions.col(k));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index x, Eigen::Index y) { return sym.values(x) < sym.values(y); });
  // Re-order clusters of (numerically) equal eigenvalues by their components.
  const double tie = 1e-10;
  for (std::size_t begin = 0; begin < order.size();) {
    std::size_t end = begin + 1;
    while (end < order.size() && sym.values(order[end]) - sym.values(order[end - 1]) <= tie) ++end;
    if (end - begin > 1) {
      std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(begin),
                       order.begin() + static_cast<std::ptrdiff_t>(end),
                       [&](Eigen::Index x, Eigen::Index y) {
                         return lexicographically_less(functions.col(x), functions.col(y));
                       });
    }
    begin = end;
  }

  EigenResult out;
  out.values.resize(n);
  out.functions.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = sym.values(order[static_cast<std::size_t>(k)]);
    out.functions.col(k) = functions.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

EigenResult leading(const EigenResult& full, std::size_t d) {
  if (d > static_cast<std::size_t>(full.values.size())) {
    fail(ErrorCode::RankExceeded, "requested " + std::to_string(d) + " eigenpairs from a " +
                                      std::to_string(full.values.size()) + "-state chain");
  }
  const auto k = static_cast<Eigen::Index>(d);
  return {full.values.head(k), full.functions.leftCols(k)};
}

EigenResult eig_smallest(const Matrix& m, const Vector& w, std::size_t d) {
  if (d > static_cast<std::size_t>(m.rows())) {
    fail(ErrorCode::RankExceeded, "d exceeds the number of states");
  }
  return leading(eig_full(m, w), d);
}

double optimal_value(const EigenResult& result) { return result.values.sum(); }

double exact_objective(const Matrix& phi, const Matrix& m) {
  if (phi.rows() != m.rows()) fail(ErrorCode::ShapeMismatch, "embedding rows must match |S|");
  return (phi.transpose() * m * phi).trace();
}

ChainModel ChainModel::build(const grid::GridSpec& spec, const ChainOptions& options) {
  ChainModel model;
  model.p = transition_matrix(spec);
  if (options.reset) {
    if (options.episode_length == 0) fail(ErrorCode::InvalidArgument, "episode length must be positive");
    const auto n = static_cast<Eigen::Index>(spec.num_states());
    const Vector uniform = Vector::Constant(n, 1.0 / static_cast<double>(n));
    model.p = reset_augmented(model.p, 1.0 / static_cast<double>(options.episode_length), uniform);
  }
  model.rho = stationary(model.p);
  model.lambda = options.lambda;
  model.p_lambda = discounted_matrix(model.p, options.lambda);
  model.dm = affinity_matrix(model.p_lambda, model.rho);
  auto q = quadratic_form(model.dm, model.rho);
  model.m = std::move(q.m);
  model.w = std::move(q.w);
  model.spectrum = eig_full(model.m, model.w);
  return model;
}

EigenResult ChainModel::smallest(std::size_t d) const { return leading(spectrum, d); }

double ChainModel::top_sum(std::size_t count) const {
  const auto n = spectrum.values.size();
  count = std::min<std::size_t>(count, static_cast<std::size_t>(n));
  return spectrum.values.tail(static_cast<Eigen::Index>(count)).sum();
}

void export_csv(const ChainModel& model, std::size_t d, const std::filesystem::path& dir,
                std::string_view config_hash) {
  const auto n = model.num_states();
  std::vector<std::string> state_cols;
  for (std::size_t v = 0; v < n; ++v) state_cols.push_back("s" + std::to_string(v));
  csv::write_matrix(csv::versioned_path(dir / "P.csv"), model.p, state_cols, config_hash);
  csv::write_matrix(csv::versioned_path(dir / "D.csv"), model.dm, state_cols, config_hash);
  csv::write_matrix(csv::versioned_path(dir / "rho.csv"), model.rho, {"rho"}, config_hash);
  const auto top = model.smallest(d);
  csv::write_matrix(csv::versioned_path(dir / "eigenvalues.csv"), top.values, {"eigenvalue"},
                    config_hash);
  std::vector<std::string> fcols;
  for (std::size_t k = 0; k < d; ++k) fcols.push_back("f" + std::to_string(k));
  csv::write_matrix(csv::versioned_path(dir / "eigenfunctions.csv"), top.functions, fcols,
                    config_hash);
}

}  // namespace laprep::chain
