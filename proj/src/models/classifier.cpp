#include "supbench/models/classifier.hpp"

#include <cstdio>
#include <memory>

#include "supbench/core/errors.hpp"
#include "supbench/core/rng.hpp"
#include "supbench/core/version.hpp"
#include "supbench/models/artifact.hpp"
#include "supbench/nn/backbone.hpp"
#include "supbench/nn/loss.hpp"

namespace supbench::models {

Classifier::Classifier(const BackboneConfig& backbone,
                       const TrainConfig& config)
    : backbone_(backbone), config_(config) {
  validate_train_config(config_);
  nn::Backbone bb =
      nn::build_backbone(backbone.architecture, backbone.pretrained,
                         config.rng_seed, "classifier/backbone");
  const int channels = bb.feature_channels;
  net_.add(std::move(bb.body));
  net_.add(std::make_unique<nn::GlobalAvgPool>("gap"));
  net_.add(std::make_unique<nn::Flatten>("flatten"));
  rng::Stream head_init(config.rng_seed, "classifier/head/init");
  net_.add(std::make_unique<nn::Linear>("fc", channels, 1, head_init));
}

TrainLog Classifier::train(const dataset::SplitManifest& split,
                           const std::vector<dataset::TileRecord>& tiles) {
  const TileIndex index(tiles);
  const std::vector<std::string> ids = apply_data_fraction(
      split.train, config_.data_fraction, config_.rng_seed);
  const std::vector<const dataset::TileRecord*> data = index.gather(ids);

  if (!data.empty()) {
    const bool first = data.front()->presence;
    bool single_class = true;
    for (const auto* t : data) {
      if (t->presence != first) {
        single_class = false;
        break;
      }
    }
    if (single_class) {
      std::fprintf(stderr,
                   "warning: classifier train split contains a single class "
                   "(all %s); training proceeds but the model cannot "
                   "discriminate\n",
                   first ? "positive" : "negative");
    }
  }

  std::vector<nn::ParamRef> params;
  net_.collect_params(params);

  const auto step = [this](const std::vector<const dataset::TileRecord*>& batch)
      -> std::vector<std::pair<std::string, double>> {
    net_.zero_grad();
    const nn::Tensor x = tiles_to_tensor(batch);
    std::vector<double> targets(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      targets[i] = batch[i]->presence ? 1.0 : 0.0;
    }
    const nn::Tensor logits = net_.forward(x, /*training=*/true);
    const nn::LossResult loss = nn::bce_with_logits(
        logits, targets, config_.positive_class_weight);
    net_.backward(loss.grad, nullptr);
    return {{"bce", loss.value}};
  };

  return run_training_loop(data, config_, "classifier", params, step);
}

double Classifier::predict_presence(const dataset::TileRecord& tile) {
  const nn::Tensor logits = net_.forward(tile_to_tensor(tile), false);
  return nn::sigmoid(logits.data[0]);
}

cam::ActivationCapture Classifier::capture(const dataset::TileRecord& tile,
                                           bool fullgrad_aux) {
  return cam::capture(net_, feature_layer(), tile_to_tensor(tile),
                      cam::Target::ClassLogit, fullgrad_aux, tile.tile_id);
}

void Classifier::save(const std::filesystem::path& path) {
  ArtifactHeader header;
  header.method = Method::Classifier;
  header.architecture = backbone_.architecture;
  header.config = config_;
  header.git_describe = kGitDescribe;
  std::vector<nn::ParamRef> state;
  net_.collect_state(state);
  write_artifact(path, header, state, {});
}

Classifier Classifier::load(const std::filesystem::path& path) {
  const LoadedArtifact art = read_artifact(path);
  if (art.header.method != Method::Classifier) {
    throw ExecutionError("artifact at " + path.string() +
                         " is a " + method_name(art.header.method) +
                         " model, not a classifier");
  }
  BackboneConfig backbone;
  backbone.architecture = art.header.architecture;
  Classifier model(backbone, art.header.config);
  std::vector<nn::ParamRef> state;
  model.net_.collect_state(state);
  load_state(art, state);
  return model;
}

}  // namespace supbench::models
