#pragma once

// Independent reference computations for the tests. Everything here works
// from first principles (raw map text, explicit sums, series) and shares no
// code with the library paths it checks.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct RawMap {
  int width = 0;
  int height = 0;
  std::vector<std::pair<int, int>> open;  // row-major
  std::vector<std::string> rows;

  bool is_open(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height && rows[y][x] != '#';
  }
  int index(int x, int y) const {
    for (std::size_t i = 0; i < open.size(); ++i) {
      if (open[i].first == x && open[i].second == y) return static_cast<int>(i);
    }
    return -1;
  }
};

inline RawMap read_map(const std::string& text) {
  RawMap m;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) m.rows.push_back(line);
  }
  m.height = static_cast<int>(m.rows.size());
  m.width = m.height ? static_cast<int>(m.rows[0].size()) : 0;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (m.rows[y][x] != '#') m.open.emplace_back(x, y);
    }
  }
  return m;
}

// Up, down, left, right with y growing downwards.
inline const int kDx[4] = {0, 0, -1, 1};
inline const int kDy[4] = {-1, 1, 0, 0};

/// Transition matrix by enumerating the four moves of each cell.
inline MatrixXd transitions(const RawMap& m) {
  const auto n = static_cast<int>(m.open.size());
  MatrixXd p = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto [x, y] = m.open[i];
    for (int a = 0; a < 4; ++a) {
      const int nx = x + kDx[a], ny = y + kDy[a];
      const int j = m.is_open(nx, ny) ? m.index(nx, ny) : i;
      p(i, j) += 0.25;
    }
  }
  return p;
}

/// Stationary distribution from the null space of (P^T - I).
inline VectorXd stationary_nullspace(const MatrixXd& p) {
  const MatrixXd a = p.transpose() - MatrixXd::Identity(p.rows(), p.cols());
  Eigen::FullPivLU<MatrixXd> lu(a);
  VectorXd k = lu.kernel().col(0);
  return k / k.sum();
}

/// sum_{tau=1}^{terms} (lambda^{tau-1} - lambda^tau) P^tau.
inline MatrixXd discounted_series(const MatrixXd& p, double lambda, int terms) {
  MatrixXd acc = MatrixXd::Zero(p.rows(), p.cols());
  MatrixXd power = p;
  double w = 1.0 - lambda;
  for (int t = 1; t <= terms; ++t) {
    acc += w * power;
    power = power * p;
    w *= lambda;
  }
  return acc;
}

/// 1/2 sum_{u,v} sum_k (f_k(u) - f_k(v))^2 D(u,v) rho(u) rho(v).
inline double double_sum_objective(const MatrixXd& f, const MatrixXd& dm, const VectorXd& rho) {
  double total = 0.0;
  for (int u = 0; u < f.rows(); ++u) {
    for (int v = 0; v < f.rows(); ++v) {
      double sq = 0.0;
      for (int k = 0; k < f.cols(); ++k) sq += (f(u, k) - f(v, k)) * (f(u, k) - f(v, k));
      total += 0.5 * sq * dm(u, v) * rho(u) * rho(v);
    }
  }
  return total;
}

/// E_{u ~ rho, v ~ P(.|u)} 1/2 sum_k (f_k(u) - f_k(v))^2 by full enumeration.
inline double expectation_objective(const MatrixXd& f, const MatrixXd& p_lambda, const VectorXd& rho) {
  double total = 0.0;
  for (int u = 0; u < f.rows(); ++u) {
    for (int v = 0; v < f.rows(); ++v) {
      if (p_lambda(u, v) == 0.0) continue;
      const double sq = (f.row(u) - f.row(v)).squaredNorm();
      total += rho(u) * p_lambda(u, v) * 0.5 * sq;
    }
  }
  return total;
}

/// sum_jk (a_j a_k - c delta_jk)(b_j b_k - c delta_jk).
inline double repulsive_double_sum(const VectorXd& a, const VectorXd& b, double c) {
  double total = 0.0;
  for (int j = 0; j < a.size(); ++j) {
    for (int k = 0; k < a.size(); ++k) {
      const double dj = j == k ? c : 0.0;
      total += (a(j) * a(k) - dj) * (b(j) * b(k) - dj);
    }
  }
  return total;
}

/// Central differences of f at x, step h.
inline std::vector<double> central_differences(const std::function<double(const std::vector<double>&)>& f,
                                               std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Generalized eigenvalues of (M, W) via Eigen's Cholesky-based solver.
inline VectorXd generalized_eigenvalues(const MatrixXd& m, const VectorXd& w) {
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(m, MatrixXd(w.asDiagonal()));
  return es.eigenvalues();
}

/// Orthogonal projector onto span(phi) under the W inner product.
inline MatrixXd w_projector(const MatrixXd& phi, const VectorXd& w) {
  const MatrixXd gram = phi.transpose() * w.asDiagonal() * phi;
  return phi * gram.completeOrthogonalDecomposition().pseudoInverse() * phi.transpose() * w.asDiagonal();
}

/// Breadth-first path lengths on the raw map.
inline std::vector<int> path_lengths(const RawMap& m, int from) {
  std::vector<int> dist(m.open.size(), -1);
  std::vector<int> queue{from};
  dist[from] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto [x, y] = m.open[queue[head]];
    for (int a = 0; a < 4; ++a) {
      const int j = m.is_open(x + kDx[a], y + kDy[a]) ? m.index(x + kDx[a], y + kDy[a]) : -1;
      if (j >= 0 && dist[j] < 0) {
        dist[j] = dist[queue[head]] + 1;
        queue.push_back(j);
      }
    }
  }
  return dist;
}

}  // namespace oracle
