#include "supbench/nn/backbone.hpp"

#include "supbench/core/errors.hpp"

namespace supbench::nn {

namespace {

std::unique_ptr<Sequential> bottleneck(const std::string& name, int in_ch,
                                       int mid_ch, int out_ch, int stride,
                                       rng::Stream& init,
                                       std::unique_ptr<Sequential>* shortcut) {
  auto main = std::make_unique<Sequential>(name + ".main");
  main->add(std::make_unique<Conv2d>(name + ".conv1", in_ch, mid_ch, 1, 1, 0,
                                     false, init));
  main->add(std::make_unique<BatchNorm2d>(name + ".bn1", mid_ch));
  main->add(std::make_unique<ReLU>(name + ".relu1"));
  main->add(std::make_unique<Conv2d>(name + ".conv2", mid_ch, mid_ch, 3,
                                     stride, 1, false, init));
  main->add(std::make_unique<BatchNorm2d>(name + ".bn2", mid_ch));
  main->add(std::make_unique<ReLU>(name + ".relu2"));
  main->add(std::make_unique<Conv2d>(name + ".conv3", mid_ch, out_ch, 1, 1, 0,
                                     false, init));
  main->add(std::make_unique<BatchNorm2d>(name + ".bn3", out_ch));
  if (in_ch != out_ch || stride != 1) {
    *shortcut = std::make_unique<Sequential>(name + ".shortcut");
    (*shortcut)->add(std::make_unique<Conv2d>(name + ".downsample", in_ch,
                                              out_ch, 1, stride, 0, false,
                                              init));
    (*shortcut)->add(std::make_unique<BatchNorm2d>(name + ".downsample_bn",
                                                   out_ch));
  }
  return main;
}

Backbone build_reduced(std::uint64_t seed_root, const std::string& prefix) {
  rng::Stream init(seed_root, prefix + "/init");
  auto body = std::make_unique<Sequential>(prefix);
  const int c1 = 6, c2 = 12, c3 = 24;
  body->add(std::make_unique<Conv2d>(prefix + ".conv1", 3, c1, 3, 2, 1, true,
                                     init));
  body->add(std::make_unique<ReLU>(prefix + ".relu1"));
  body->add(std::make_unique<Conv2d>(prefix + ".conv2", c1, c2, 3, 2, 1, true,
                                     init));
  body->add(std::make_unique<ReLU>(prefix + ".relu2"));
  body->add(std::make_unique<Conv2d>(prefix + ".conv3", c2, c3, 3, 2, 1, true,
                                     init));
  body->add(std::make_unique<ReLU>(prefix + ".relu3"));
  auto main = std::make_unique<Sequential>(prefix + ".block.main");
  main->add(std::make_unique<Conv2d>(prefix + ".block.conv1", c3, c3, 3, 1, 1,
                                     true, init));
  main->add(std::make_unique<ReLU>(prefix + ".block.relu"));
  main->add(std::make_unique<Conv2d>(prefix + ".block.conv2", c3, c3, 3, 1, 1,
                                     true, init));
  body->add(std::make_unique<ResidualBlock>(prefix + ".block", std::move(main),
                                            nullptr));
  Backbone b;
  b.feature_layer = body->layer_count() - 1;
  b.body = std::move(body);
  b.feature_channels = c3;
  b.feature_stride = 8;
  return b;
}

Backbone build_resnet50(std::uint64_t seed_root, const std::string& prefix) {
  rng::Stream init(seed_root, prefix + "/init");
  auto body = std::make_unique<Sequential>(prefix);
  body->add(std::make_unique<Conv2d>(prefix + ".conv1", 3, 64, 7, 2, 3, false,
                                     init));
  body->add(std::make_unique<BatchNorm2d>(prefix + ".bn1", 64));
  body->add(std::make_unique<ReLU>(prefix + ".relu1"));
  body->add(std::make_unique<MaxPool2d>(prefix + ".maxpool", 3, 2, 1));

  const int stage_blocks[4] = {3, 4, 6, 3};
  const int stage_mid[4] = {64, 128, 256, 512};
  int in_ch = 64;
  for (int stage = 0; stage < 4; ++stage) {
    const int out_ch = stage_mid[stage] * 4;
    for (int blk = 0; blk < stage_blocks[stage]; ++blk) {
      const int stride = (stage > 0 && blk == 0) ? 2 : 1;
      const std::string name = prefix + ".layer" + std::to_string(stage + 1) +
                               "." + std::to_string(blk);
      std::unique_ptr<Sequential> shortcut;
      auto main = bottleneck(name, in_ch, stage_mid[stage], out_ch, stride,
                             init, &shortcut);
      body->add(std::make_unique<ResidualBlock>(name, std::move(main),
                                                std::move(shortcut)));
      in_ch = out_ch;
    }
  }
  Backbone b;
  b.feature_layer = body->layer_count() - 1;
  b.body = std::move(body);
  b.feature_channels = 2048;
  b.feature_stride = 32;
  return b;
}

}  // namespace

BackboneArch backbone_from_name(const std::string& name) {
  if (name == "reduced") return BackboneArch::Reduced;
  if (name == "resnet50") return BackboneArch::ResNet50;
  throw ValidationError("unknown backbone: " + name +
                              " (expected resnet50 or reduced)");
}

std::string backbone_name(BackboneArch arch) {
  return arch == BackboneArch::Reduced ? "reduced" : "resnet50";
}

Backbone build_backbone(BackboneArch arch, bool pretrained,
                        std::uint64_t seed_root, const std::string& prefix) {
  if (pretrained) {
    throw ValidationError(
        "pretrained backbone weights are not available in this build; "
        "set pretrained=false to train from random initialisation");
  }
  return arch == BackboneArch::Reduced ? build_reduced(seed_root, prefix)
                                       : build_resnet50(seed_root, prefix);
}

}  // namespace supbench::nn
