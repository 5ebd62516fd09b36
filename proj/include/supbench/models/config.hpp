#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "supbench/models/detection.hpp"
#include "supbench/nn/backbone.hpp"
#include "supbench/nn/optim.hpp"

namespace supbench::models {

struct BackboneConfig {
  nn::BackboneArch architecture = nn::BackboneArch::Reduced;
  // Training always starts from random initialization; true fails loudly.
  bool pretrained = false;
};

// Shared training knobs; per-method fields that do not apply are ignored by
// the other trainers but still validated.
struct TrainConfig {
  int epochs = 10;
  int batch_size = 8;
  nn::OptimizerKind optimizer = nn::OptimizerKind::Adam;
  double learning_rate = 1e-4;
  double positive_class_weight = 20.0;
  // VAE total loss = w * MSE + (1 - w) * KL with this w.
  double reconstruction_weight = 0.9;
  int latent_dims = 4096;
  double data_fraction = 1.0;
  std::uint64_t rng_seed = 0;
};

// Published per-method defaults (detector batch 8, classifier batch 14 at
// learning rate 1e-4 with positive weight 20; VAE batch 5 at 5e-5 with
// reconstruction weight 0.9 and 4096 latent dims; all Adam, 10 epochs).
TrainConfig default_train_config(Method method);

// epochs >= 0, batch/latent/lr/weight positive, reconstruction_weight in
// [0,1], data_fraction in (0,1]. Throws ValidationError.
void validate_train_config(const TrainConfig& config);

// Deterministic train-subset selection: a fixed seed-derived shuffle of `ids`
// truncated to ceil(fraction * n); fractions nest for a given seed.
std::vector<std::string> apply_data_fraction(std::vector<std::string> ids,
                                             double fraction,
                                             std::uint64_t rng_seed);

}  // namespace supbench::models
