#pragma once

#include <vector>

#include "supbench/nn/tensor.hpp"

namespace supbench::nn {

struct LossResult {
  double value = 0.0;
  Tensor grad;  // d value / d input, same shape as the input
};

// Numerically stable binary cross-entropy on logits (N,1) with positive-class
// weighting; mean reduction over the batch.
LossResult bce_with_logits(const Tensor& logits,
                           const std::vector<double>& targets,
                           double pos_weight);

// Softmax cross-entropy on logits (N,K) with per-class weights; the reduction
// divides by the summed weights of the realised targets.
LossResult softmax_cross_entropy(const Tensor& logits,
                                 const std::vector<int>& targets,
                                 const std::vector<double>& class_weights);

// Mean squared error, mean reduction over all elements.
LossResult mse_loss(const Tensor& pred, const Tensor& target);

// Smooth L1 (Huber with beta transition), mean reduction over all elements.
LossResult smooth_l1_loss(const Tensor& pred, const Tensor& target,
                          double beta = 1.0);

struct KlResult {
  double value = 0.0;
  Tensor grad_mu;
  Tensor grad_logvar;
};

// KL(q(z|x) || N(0,I)) for a diagonal Gaussian with parameters (mu, logvar),
// both (N,D): summed over latent dimensions, mean over the batch.
KlResult kl_divergence(const Tensor& mu, const Tensor& logvar);

// Softmax probabilities for (N,K) logits.
Tensor softmax(const Tensor& logits);

double sigmoid(double x);

}  // namespace supbench::nn
