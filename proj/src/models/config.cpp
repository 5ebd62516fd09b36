#include "supbench/models/config.hpp"

#include <cmath>

#include "supbench/core/errors.hpp"
#include "supbench/core/rng.hpp"

namespace supbench::models {

TrainConfig default_train_config(Method method) {
  TrainConfig c;
  switch (method) {
    case Method::Detector:
      c.batch_size = 8;
      c.learning_rate = 1e-4;
      break;
    case Method::Classifier:
      c.batch_size = 14;
      c.learning_rate = 1e-4;
      break;
    case Method::Vae:
      c.batch_size = 5;
      c.learning_rate = 5e-5;
      break;
  }
  return c;
}

void validate_train_config(const TrainConfig& config) {
  if (config.epochs < 0) {
    throw ValidationError("train config: epochs must be >= 0, got " +
                          std::to_string(config.epochs));
  }
  if (config.batch_size <= 0) {
    throw ValidationError("train config: batch_size must be positive, got " +
                          std::to_string(config.batch_size));
  }
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw ValidationError(
        "train config: learning_rate must be positive and finite");
  }
  if (!(config.positive_class_weight > 0.0) ||
      !std::isfinite(config.positive_class_weight)) {
    throw ValidationError(
        "train config: positive_class_weight must be positive and finite");
  }
  if (!(config.reconstruction_weight >= 0.0 &&
        config.reconstruction_weight <= 1.0)) {
    throw ValidationError(
        "train config: reconstruction_weight must lie in [0, 1]");
  }
  if (config.latent_dims <= 0) {
    throw ValidationError("train config: latent_dims must be positive, got " +
                          std::to_string(config.latent_dims));
  }
  if (!(config.data_fraction > 0.0 && config.data_fraction <= 1.0)) {
    throw ValidationError("train config: data_fraction must lie in (0, 1]");
  }
}

std::vector<std::string> apply_data_fraction(std::vector<std::string> ids,
                                             double fraction,
                                             std::uint64_t rng_seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("data_fraction must lie in (0, 1]");
  }
  if (fraction == 1.0) return ids;
  rng::Stream stream(rng_seed, "data_fraction");
  stream.shuffle(ids);
  const auto keep = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(ids.size())));
  ids.resize(std::max<std::size_t>(keep, 1));
  return ids;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Detector: return "detector";
    case Method::Classifier: return "classifier";
    case Method::Vae: return "vae";
  }
  throw ValidationError("method_name: invalid method enum value");
}

Method method_from_name(const std::string& name) {
  if (name == "detector") return Method::Detector;
  if (name == "classifier") return Method::Classifier;
  if (name == "vae") return Method::Vae;
  throw ValidationError("unknown method '" + name +
                        "' (expected detector, classifier, or vae)");
}

}  // namespace supbench::models
