#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace laprep::chain {

struct SymmetricEigen {
  Eigen::VectorXd values;   // unsorted, as produced by the sweeps
  Eigen::MatrixXd vectors;  // orthonormal columns
  std::size_t sweeps = 0;
};

/// Cyclic Jacobi on a dense symmetric matrix. Rotations visit (p, q) in
/// row-major order each sweep; stops once the off-diagonal Frobenius norm is
/// below `tolerance`. Throws NumericalFailure after `max_sweeps`.
SymmetricEigen jacobi_eigen(Eigen::MatrixXd a, double tolerance = 1e-12,
                            std::size_t max_sweeps = 100);

}  // namespace laprep::chain
