#pragma once

#include <filesystem>
#include <vector>

#include "supbench/cam/capture.hpp"
#include "supbench/dataset/types.hpp"
#include "supbench/models/config.hpp"
#include "supbench/models/training.hpp"
#include "supbench/nn/layers.hpp"

namespace supbench::models {

// Binary presence classifier: backbone features, global average pooling, one
// logit. Trained with positively weighted binary cross-entropy.
class Classifier {
 public:
  Classifier(const BackboneConfig& backbone, const TrainConfig& config);

  // Trains on split.train presence labels. All-one-class training data is
  // legal but emits a warning. Returns the per-epoch log.
  TrainLog train(const dataset::SplitManifest& split,
                 const std::vector<dataset::TileRecord>& tiles);

  // Sigmoid-calibrated presence score; deterministic in inference mode.
  double predict_presence(const dataset::TileRecord& tile);

  // Activation capture at the backbone feature map for CAM.
  cam::ActivationCapture capture(const dataset::TileRecord& tile,
                                 bool fullgrad_aux);

  void save(const std::filesystem::path& path);
  static Classifier load(const std::filesystem::path& path);

  const TrainConfig& config() const { return config_; }
  const BackboneConfig& backbone_config() const { return backbone_; }
  nn::Sequential& network() { return net_; }
  // The feature map is the backbone body's output (child 0 of the network).
  int feature_layer() const { return 0; }

 private:
  BackboneConfig backbone_;
  TrainConfig config_;
  nn::Sequential net_{"classifier"};
};

}  // namespace supbench::models
