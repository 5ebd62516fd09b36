#include "supbench/cam/capture.hpp"

#include <utility>

#include "supbench/core/errors.hpp"

namespace supbench::cam {

ActivationCapture capture(nn::Sequential& net, int feature_layer,
                          const nn::Tensor& input, Target target,
                          bool want_fullgrad_aux, const std::string& tile_id) {
  if (feature_layer < 0 || feature_layer >= net.layer_count()) {
    throw ValidationError("capture: feature layer index " +
                          std::to_string(feature_layer) +
                          " not found in network '" + net.name() + "' (" +
                          std::to_string(net.layer_count()) + " layers)");
  }
  if (input.shape.empty() || input.shape[0] != 1) {
    throw ValidationError("capture: expected a single-sample input, got " +
                          input.shape_str());
  }

  net.zero_grad();

  nn::CamTap tap;
  tap.feature_layer = feature_layer;
  tap.want_bias_fields = want_fullgrad_aux;
  tap.want_input_gradient = want_fullgrad_aux;

  const nn::Tensor out = net.forward_tapped(input, /*training=*/false, tap);

  double value = 0.0;
  nn::Tensor seed = nn::zeros_like(out);
  switch (target) {
    case Target::ClassLogit: {
      if (out.size() != 1) {
        throw ValidationError(
            "capture: class_logit target requires a single-logit output, "
            "network produced " +
            out.shape_str());
      }
      value = out.data[0];
      seed.data[0] = 1.0;
      break;
    }
    case Target::ReconstructionError: {
      if (out.shape != input.shape) {
        throw ValidationError(
            "capture: reconstruction_error target requires the output shape " +
            out.shape_str() + " to match the input shape " +
            input.shape_str());
      }
      const double n = static_cast<double>(out.size());
      for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double d = out.data[i] - input.data[i];
        value += d * d;
        seed.data[i] = 2.0 * d / n;
      }
      value /= n;
      break;
    }
  }

  net.backward_tapped(seed, tap);

  ActivationCapture cap;
  cap.tile_id = tile_id;
  cap.target_value = value;
  cap.activations = std::move(tap.feature_activations);
  cap.gradients = std::move(tap.feature_gradients);
  if (want_fullgrad_aux) {
    cap.input = input;
    cap.input_gradient = std::move(tap.input_gradient);
    cap.bias_fields = std::move(tap.bias_fields);
  }
  return cap;
}

}  // namespace supbench::cam
