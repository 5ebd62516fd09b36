#include "supbench/nn/optim.hpp"

#include <cmath>

#include "supbench/core/errors.hpp"

namespace supbench::nn {

namespace {
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;
constexpr double kAdamWDecay = 0.01;
constexpr double kRmsAlpha = 0.99;
}  // namespace

OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "adamw") return OptimizerKind::AdamW;
  if (name == "adagrad") return OptimizerKind::Adagrad;
  if (name == "rmsprop") return OptimizerKind::RmsProp;
  if (name == "asgd") return OptimizerKind::Asgd;
  throw ValidationError("unknown optimizer: " + name);
}

std::string optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Adam: return "adam";
    case OptimizerKind::AdamW: return "adamw";
    case OptimizerKind::Adagrad: return "adagrad";
    case OptimizerKind::RmsProp: return "rmsprop";
    case OptimizerKind::Asgd: return "asgd";
  }
  return "adam";
}

Optimizer::Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {
  if (lr < 0.0 || !std::isfinite(lr)) {
    throw ValidationError("learning rate must be finite and >= 0");
  }
}

void Optimizer::step(std::vector<ParamRef>& params) {
  if (state1_.empty()) {
    state1_.resize(params.size());
    state2_.resize(params.size());
    for (std::size_t p = 0; p < params.size(); ++p) {
      state1_[p].assign(params[p].value->size(), 0.0);
      if (kind_ == OptimizerKind::Adam || kind_ == OptimizerKind::AdamW) {
        state2_[p].assign(params[p].value->size(), 0.0);
      }
    }
  }
  ++step_count_;
  const double t = static_cast<double>(step_count_);

  for (std::size_t p = 0; p < params.size(); ++p) {
    double* value = params[p].value->ptr();
    const double* grad = params[p].grad->ptr();
    const std::size_t n = params[p].value->size();
    auto& s1 = state1_[p];

    switch (kind_) {
      case OptimizerKind::Adam:
      case OptimizerKind::AdamW: {
        auto& s2 = state2_[p];
        const double bc1 = 1.0 - std::pow(kBeta1, t);
        const double bc2 = 1.0 - std::pow(kBeta2, t);
        for (std::size_t i = 0; i < n; ++i) {
          s1[i] = kBeta1 * s1[i] + (1.0 - kBeta1) * grad[i];
          s2[i] = kBeta2 * s2[i] + (1.0 - kBeta2) * grad[i] * grad[i];
          const double mhat = s1[i] / bc1;
          const double vhat = s2[i] / bc2;
          if (kind_ == OptimizerKind::AdamW) {
            value[i] -= lr_ * kAdamWDecay * value[i];
          }
          value[i] -= lr_ * mhat / (std::sqrt(vhat) + kEps);
        }
        break;
      }
      case OptimizerKind::Adagrad: {
        for (std::size_t i = 0; i < n; ++i) {
          s1[i] += grad[i] * grad[i];
          value[i] -= lr_ * grad[i] / (std::sqrt(s1[i]) + 1e-10);
        }
        break;
      }
      case OptimizerKind::RmsProp: {
        for (std::size_t i = 0; i < n; ++i) {
          s1[i] = kRmsAlpha * s1[i] + (1.0 - kRmsAlpha) * grad[i] * grad[i];
          value[i] -= lr_ * grad[i] / (std::sqrt(s1[i]) + kEps);
        }
        break;
      }
      case OptimizerKind::Asgd: {
        // SGD step followed by a running mean of the iterates.
        for (std::size_t i = 0; i < n; ++i) {
          value[i] -= lr_ * grad[i];
          s1[i] += (value[i] - s1[i]) / t;
        }
        break;
      }
    }
  }
}

void Optimizer::finalize(std::vector<ParamRef>& params) {
  if (kind_ != OptimizerKind::Asgd || step_count_ == 0) return;
  for (std::size_t p = 0; p < params.size(); ++p) {
    double* value = params[p].value->ptr();
    for (std::size_t i = 0; i < params[p].value->size(); ++i) {
      value[i] = state1_[p][i];
    }
  }
}

}  // namespace supbench::nn
