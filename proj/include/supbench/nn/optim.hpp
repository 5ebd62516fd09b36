#pragma once

#include <string>
#include <vector>

#include "supbench/nn/layers.hpp"
#include "supbench/nn/tensor.hpp"

namespace supbench::nn {

enum class OptimizerKind { Adam, AdamW, Adagrad, RmsProp, Asgd };

OptimizerKind optimizer_from_name(const std::string& name);
std::string optimizer_name(OptimizerKind kind);

// Stateful first-order optimiser over a fixed parameter list. The parameter
// list must stay the same (same order, same sizes) across steps.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr);

  void step(std::vector<ParamRef>& params);

  // ASGD keeps a running average of the iterates; call once after the last
  // step to install it. No-op for the other optimisers.
  void finalize(std::vector<ParamRef>& params);

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return lr_; }

 private:
  OptimizerKind kind_;
  double lr_;
  long step_count_ = 0;
  // Per-parameter state buffers, allocated lazily on the first step.
  std::vector<std::vector<double>> state1_;  // adam m / adagrad acc / rmsprop v / asgd avg
  std::vector<std::vector<double>> state2_;  // adam v
};

}  // namespace supbench::nn
