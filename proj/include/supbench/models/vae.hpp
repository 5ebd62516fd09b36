#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "supbench/cam/capture.hpp"
#include "supbench/dataset/types.hpp"
#include "supbench/models/config.hpp"
#include "supbench/models/training.hpp"
#include "supbench/nn/layers.hpp"

namespace supbench::models {

// Reconstruction-loss scaling bounds taken from the validation split.
struct AnomalyNormalizer {
  double min_loss = 0.0;
  double max_loss = 0.0;
};

// z = mu + exp(0.5 * logvar) * eps, elementwise.
nn::Tensor reparameterize(const nn::Tensor& mu, const nn::Tensor& logvar,
                          const nn::Tensor& eps);

struct LoadedVae;

// Convolutional variational autoencoder over tiles. The encoder mirrors the
// backbone; mu/logvar heads are single linear layers; the decoder mirrors the
// encoder with deconvolutions. Inference is deterministic (z = mu), which
// makes the mu path a plain sequential network usable for CAM capture.
class Vae {
 public:
  // Linear heads bind the model to one tile geometry, fixed at construction.
  Vae(const BackboneConfig& backbone, const TrainConfig& config,
      int tile_size = dataset::kTileSize);

  // Trains on split.vae_train only. A presence-positive tile in the training
  // stream is a hard error. Loss = w * MSE + (1 - w) * KL.
  TrainLog train(const dataset::SplitManifest& split,
                 const std::vector<dataset::TileRecord>& tiles);

  // Deterministic per-tile reconstruction MSE (z = mu).
  double reconstruction_mse(const dataset::TileRecord& tile);

  // Min/max reconstruction MSE over the validation split. Hard error when the
  // validation set has fewer than two tiles or a degenerate loss range.
  AnomalyNormalizer calibrate_normalizer(
      const dataset::SplitManifest& split,
      const std::vector<dataset::TileRecord>& tiles);

  // clamp((MSE - min) / (max - min), 0, 1).
  double anomaly_score(const AnomalyNormalizer& normalizer,
                       const dataset::TileRecord& tile);

  // Activation capture against the reconstruction-error target.
  cam::ActivationCapture capture(const dataset::TileRecord& tile,
                                 bool fullgrad_aux);

  // Artifacts embed the normalizer when one is provided.
  void save(const std::filesystem::path& path,
            const std::optional<AnomalyNormalizer>& normalizer = {});
  static LoadedVae load(const std::filesystem::path& path);

  const TrainConfig& config() const { return config_; }
  const BackboneConfig& backbone_config() const { return backbone_; }
  nn::Sequential& inference_network() { return main_; }
  int feature_layer() const { return 0; }
  int tile_size() const { return tile_size_; }

 private:
  BackboneConfig backbone_;
  TrainConfig config_;
  int tile_size_ = dataset::kTileSize;
  // Inference path: backbone body, flatten, mu head, decoder layers.
  nn::Sequential main_{"vae"};
  std::unique_ptr<nn::Linear> logvar_;  // parallel head off the flatten output
  int mu_index_ = 0;                    // index of the mu head inside main_
};

struct LoadedVae {
  Vae model;
  std::optional<AnomalyNormalizer> normalizer;
};

}  // namespace supbench::models
