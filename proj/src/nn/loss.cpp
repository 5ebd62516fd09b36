#include "supbench/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "supbench/core/errors.hpp"

namespace supbench::nn {

namespace {

double softplus(double x) {
  // log(1 + exp(x)) without overflow.
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

LossResult bce_with_logits(const Tensor& logits,
                           const std::vector<double>& targets,
                           double pos_weight) {
  const std::size_t n = targets.size();
  if (logits.size() != n) {
    throw ValidationError("bce_with_logits: logit/target size mismatch");
  }
  LossResult res;
  res.grad = zeros_like(logits);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = logits.data[i];
    const double y = targets[i];
    // loss = pos_weight*y*softplus(-x) + (1-y)*(x + softplus(-x))
    res.value += pos_weight * y * softplus(-x) + (1.0 - y) * (x + softplus(-x));
    const double s = sigmoid(x);
    res.grad.data[i] = (-pos_weight * y * (1.0 - s) + (1.0 - y) * s) /
                       static_cast<double>(n);
  }
  res.value /= static_cast<double>(n);
  return res;
}

Tensor softmax(const Tensor& logits) {
  const int n = logits.dim(0), k = logits.dim(1);
  Tensor probs(logits.shape);
  for (int i = 0; i < n; ++i) {
    const double* row = logits.ptr() + static_cast<std::size_t>(i) * k;
    double* out = probs.ptr() + static_cast<std::size_t>(i) * k;
    double mx = row[0];
    for (int j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0;
    for (int j = 0; j < k; ++j) {
      out[j] = std::exp(row[j] - mx);
      denom += out[j];
    }
    for (int j = 0; j < k; ++j) out[j] /= denom;
  }
  return probs;
}

LossResult softmax_cross_entropy(const Tensor& logits,
                                 const std::vector<int>& targets,
                                 const std::vector<double>& class_weights) {
  const int n = logits.dim(0), k = logits.dim(1);
  if (static_cast<int>(targets.size()) != n) {
    throw ValidationError("softmax_cross_entropy: batch size mismatch");
  }
  if (static_cast<int>(class_weights.size()) != k) {
    throw ValidationError("softmax_cross_entropy: weight count mismatch");
  }
  Tensor probs = softmax(logits);
  double weight_sum = 0.0;
  for (int i = 0; i < n; ++i) weight_sum += class_weights[targets[i]];
  if (weight_sum <= 0.0) {
    throw ValidationError("softmax_cross_entropy: zero weight sum");
  }
  LossResult res;
  res.grad = zeros_like(logits);
  for (int i = 0; i < n; ++i) {
    const int t = targets[i];
    const double w = class_weights[t];
    const double p = std::max(probs.data[static_cast<std::size_t>(i) * k + t],
                              1e-300);
    res.value += -w * std::log(p);
    for (int j = 0; j < k; ++j) {
      const double indicator = (j == t) ? 1.0 : 0.0;
      res.grad.data[static_cast<std::size_t>(i) * k + j] =
          w * (probs.data[static_cast<std::size_t>(i) * k + j] - indicator) /
          weight_sum;
    }
  }
  res.value /= weight_sum;
  return res;
}

LossResult mse_loss(const Tensor& pred, const Tensor& target) {
  if (pred.size() != target.size()) {
    throw ValidationError("mse_loss: size mismatch");
  }
  LossResult res;
  res.grad = zeros_like(pred);
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data[i] - target.data[i];
    res.value += d * d;
    res.grad.data[i] = 2.0 * d / n;
  }
  res.value /= n;
  return res;
}

LossResult smooth_l1_loss(const Tensor& pred, const Tensor& target,
                          double beta) {
  if (pred.size() != target.size()) {
    throw ValidationError("smooth_l1_loss: size mismatch");
  }
  LossResult res;
  res.grad = zeros_like(pred);
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data[i] - target.data[i];
    const double a = std::abs(d);
    if (a < beta) {
      res.value += 0.5 * d * d / beta;
      res.grad.data[i] = d / beta / n;
    } else {
      res.value += a - 0.5 * beta;
      res.grad.data[i] = (d > 0.0 ? 1.0 : -1.0) / n;
    }
  }
  res.value /= n;
  return res;
}

KlResult kl_divergence(const Tensor& mu, const Tensor& logvar) {
  if (mu.size() != logvar.size() || mu.dim(0) != logvar.dim(0)) {
    throw ValidationError("kl_divergence: shape mismatch");
  }
  const double n = static_cast<double>(mu.dim(0));
  KlResult res;
  res.grad_mu = zeros_like(mu);
  res.grad_logvar = zeros_like(logvar);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double m = mu.data[i];
    const double lv = logvar.data[i];
    const double var = std::exp(lv);
    res.value += -0.5 * (1.0 + lv - m * m - var);
    res.grad_mu.data[i] = m / n;
    res.grad_logvar.data[i] = -0.5 * (1.0 - var) / n;
  }
  res.value /= n;
  return res;
}

}  // namespace supbench::nn
