#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <vector>

#include "supbench/dataset/types.hpp"
#include "supbench/models/config.hpp"
#include "supbench/models/training.hpp"
#include "supbench/nn/layers.hpp"

namespace supbench::models {

struct DetectorOutput {
  std::vector<Detection> detections;  // NMS-suppressed, scores in [0, 1]
  double presence_score = 0.0;        // max detection score, 0 when empty
};

// Greedy non-maximum suppression; returns indices of kept boxes in
// descending score order.
std::vector<int> nms(const std::vector<geom::BoxD>& boxes,
                     const std::vector<double>& scores, double iou_threshold);

// Anchor deltas in the usual parameterization: (dx, dy) scaled by the
// reference size, (dw, dh) in log space.
std::array<double, 4> encode_box(const geom::BoxD& target,
                                 const geom::BoxD& reference);
geom::BoxD decode_box(const geom::BoxD& reference,
                      const std::array<double, 4>& deltas);

// Two-stage region-proposal detector: a backbone feature map feeds an RPN
// (shared 3x3 conv, objectness and box-delta heads over 9 anchors per cell)
// whose proposals are RoI-pooled to 7x7 and classified/refined by a small
// fully connected head. Classification uses positively weighted cross
// entropy, box regression uses smooth L1.
class Detector {
 public:
  Detector(const BackboneConfig& backbone, const TrainConfig& config);

  // Trains on split.train box annotations.
  TrainLog train(const dataset::SplitManifest& split,
                 const std::vector<dataset::TileRecord>& tiles);

  DetectorOutput predict(const dataset::TileRecord& tile);

  void save(const std::filesystem::path& path);
  static Detector load(const std::filesystem::path& path);

  const TrainConfig& config() const { return config_; }
  const BackboneConfig& backbone_config() const { return backbone_; }

 private:
  struct ImagePass;

  std::vector<nn::ParamRef> collect_params();
  std::vector<nn::ParamRef> collect_state();
  ImagePass forward_image(const nn::Tensor& x, bool training);
  std::vector<geom::BoxD> cell_anchors(int fh, int fw) const;

  BackboneConfig backbone_;
  TrainConfig config_;
  int feature_channels_ = 0;
  int feature_stride_ = 0;

  nn::Sequential features_{"features"};    // backbone body
  nn::Sequential rpn_shared_{"rpn"};       // 3x3 conv + relu
  std::unique_ptr<nn::Conv2d> rpn_obj_;    // 1x1 -> anchors
  std::unique_ptr<nn::Conv2d> rpn_delta_;  // 1x1 -> 4 * anchors
  std::unique_ptr<nn::Linear> head_fc_;    // pooled features -> hidden
  std::unique_ptr<nn::ReLU> head_relu_;
  std::unique_ptr<nn::Linear> head_cls_;   // hidden -> {background, panel}
  std::unique_ptr<nn::Linear> head_reg_;   // hidden -> 4 deltas
};

}  // namespace supbench::models
