#pragma once

#include <string>
#include <vector>

#include "supbench/nn/layers.hpp"
#include "supbench/nn/tensor.hpp"

namespace supbench::cam {

// Scalar whose gradient the capture backpropagates.
enum class Target {
  ClassLogit,            // single positive-class logit emitted by the network
  ReconstructionError,   // MSE between network output and its input
};

// Activations and target-gradients harvested at a network's feature layer,
// plus the per-layer auxiliaries FullGrad needs.
struct ActivationCapture {
  std::string tile_id;
  double target_value = 0.0;
  nn::Tensor activations;  // (1, C, h, w) feature-layer output
  nn::Tensor gradients;    // (1, C, h, w) d(target)/d(activations)
  // FullGrad auxiliaries; empty unless requested at capture time.
  nn::Tensor input;           // (1, C_in, H, W)
  nn::Tensor input_gradient;  // (1, C_in, H, W)
  std::vector<nn::CamTap::BiasField> bias_fields;
};

// Runs `net` in eval mode on a single-sample input, backpropagates from the
// requested scalar target, and harvests activations plus gradients at
// `feature_layer` (an index into `net`'s direct children; out of range is a
// hard error). `want_fullgrad_aux` additionally collects per-layer bias
// fields and the input gradient. Parameter gradients are zeroed before the
// pass; each call needs exclusive use of `net`.
ActivationCapture capture(nn::Sequential& net, int feature_layer,
                          const nn::Tensor& input, Target target,
                          bool want_fullgrad_aux,
                          const std::string& tile_id = {});

}  // namespace supbench::cam
