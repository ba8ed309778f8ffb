#pragma once

// Penalized graph-drawing loss on mini-batches of embeddings.
//
//   attractive = mean_i 1/2 ||phi(u_i) - phi(v_i)||^2
//   repulsive  = mean_i (phi(u_i).phi(w_i))^2 - c ||phi(u_i)||^2 - c ||phi(w_i)||^2 + c^2 d
//
// The repulsive form is the closed form of
//   sum_jk (phi_j(u) phi_k(u) - c delta_jk)(phi_j(w) phi_k(w) - c delta_jk).

#include <vector>

#include "laprep/mlp.hpp"

namespace laprep::repr {

using nn::RowMatrix;

double attractive_term(const RowMatrix& pu, const RowMatrix& pv);
double repulsive_term(const RowMatrix& pu, const RowMatrix& pw, double c);

struct LossTerms {
  double attractive = 0.0;
  double repulsive = 0.0;
  double total = 0.0;
};

/// Gradients of attractive + beta * repulsive with respect to each
/// embedding block.
struct EmbeddingGradients {
  RowMatrix du;
  RowMatrix dv;
  RowMatrix du_neg;
  RowMatrix dw;
};

LossTerms loss_with_gradients(const RowMatrix& pu, const RowMatrix& pv, const RowMatrix& pu_neg,
                              const RowMatrix& pw, double beta, double c,
                              EmbeddingGradients* grads);

}  // namespace laprep::repr
