#pragma once

#include "gps/tensor.hpp"

namespace gps {

// Embeddings for one mini-batch: target rows z_b of the original graphs and
// online+predictor rows of the two augmented views. All B x d, B >= 2.
struct BatchViews {
  Tensor target;  // Z, computed without gradients
  Tensor weak;    // H_w
  Tensor strong;  // H_s
  double tau = 0.5;
};

// Mean cosine distance between matched rows: (1/B) sum_b (1 - cos(z_b, h_b)).
// Range [0, 2]. NumericError on a zero-norm row.
Tensor similarity_loss(const Tensor& target, const Tensor& online);

// Softmax over b of cos(h, z_b) / tau: a 1 x B probability row. The anchor's
// own target row is included in the normalization.
Tensor similarity_distribution(const Tensor& h, const Tensor& target, double tau);

// Symmetrized KL between matched rows of two row-stochastic B x B matrices:
// (1/B) sum_rows  0.5 * (KL(mu||nu) + KL(nu||mu)).
Tensor consistency_loss(const Tensor& mu, const Tensor& nu);

struct ObjectiveTerms {
  Tensor l_sl;  // undefined when disabled
  Tensor l_cl;
};

// Full batch objective: similarity loss on the weak view plus consistency
// between the strong-view and weak-view similarity distributions. The flags
// drop a term (ablations).
ObjectiveTerms batch_objective(const BatchViews& views, bool use_sl, bool use_cl);

}  // namespace gps
