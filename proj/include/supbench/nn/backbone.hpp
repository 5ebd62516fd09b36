#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "supbench/nn/layers.hpp"

namespace supbench::nn {

enum class BackboneArch { Reduced, ResNet50 };

BackboneArch backbone_from_name(const std::string& name);
std::string backbone_name(BackboneArch arch);

struct Backbone {
  std::unique_ptr<Sequential> body;
  int feature_layer = -1;    // index into body whose output is the feature map
  int feature_channels = 0;
  int feature_stride = 0;    // input-to-feature downsampling factor
};

// Builds a feature extractor. `reduced` is the desk-scale default: three
// stride-2 conv stages plus one residual block, no batch norm. `resnet50` is
// the fidelity architecture (stem + 3/4/6/3 bottleneck stages with batch
// norm). Pretrained weights are not available in this environment, so
// `pretrained=true` fails loudly instead of silently training from scratch.
Backbone build_backbone(BackboneArch arch, bool pretrained,
                        std::uint64_t seed_root, const std::string& prefix);

}  // namespace supbench::nn
