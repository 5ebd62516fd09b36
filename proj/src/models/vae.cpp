#include "supbench/models/vae.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "supbench/core/errors.hpp"
#include "supbench/core/rng.hpp"
#include "supbench/core/version.hpp"
#include "supbench/models/artifact.hpp"
#include "supbench/nn/backbone.hpp"
#include "supbench/nn/loss.hpp"

namespace supbench::models {

namespace {

int conv_out(int in, int k, int s, int p) { return (in + 2 * p - k) / s + 1; }

// Per-stage spatial sizes of the encoder, input size first.
std::vector<int> spatial_chain(nn::BackboneArch arch, int tile) {
  std::vector<int> chain = {tile};
  if (arch == nn::BackboneArch::Reduced) {
    for (int i = 0; i < 3; ++i) {
      chain.push_back(conv_out(chain.back(), 3, 2, 1));
    }
  } else {
    chain.push_back(conv_out(chain.back(), 7, 2, 3));  // stem conv
    chain.push_back(conv_out(chain.back(), 3, 2, 1));  // stem pool
    for (int i = 0; i < 3; ++i) {                      // stages 2..4
      chain.push_back(conv_out(chain.back(), 3, 2, 1));
    }
  }
  return chain;
}

std::vector<int> decoder_channels(nn::BackboneArch arch) {
  if (arch == nn::BackboneArch::Reduced) return {24, 12, 6, 3};
  return {2048, 1024, 512, 256, 64, 3};
}

}  // namespace

nn::Tensor reparameterize(const nn::Tensor& mu, const nn::Tensor& logvar,
                          const nn::Tensor& eps) {
  if (mu.shape != logvar.shape || mu.shape != eps.shape) {
    throw ValidationError("reparameterize: mu/logvar/eps shapes must match");
  }
  nn::Tensor z(mu.shape);
  for (std::size_t i = 0; i < z.data.size(); ++i) {
    z.data[i] = mu.data[i] + std::exp(0.5 * logvar.data[i]) * eps.data[i];
  }
  return z;
}

Vae::Vae(const BackboneConfig& backbone, const TrainConfig& config,
         int tile_size)
    : backbone_(backbone), config_(config), tile_size_(tile_size) {
  validate_train_config(config_);
  if (tile_size_ < 8) {
    throw ValidationError("vae tile size must be at least 8 pixels");
  }
  nn::Backbone bb = nn::build_backbone(backbone.architecture,
                                       backbone.pretrained, config.rng_seed,
                                       "vae/backbone");
  const std::vector<int> chain =
      spatial_chain(backbone.architecture, tile_size_);
  const int feat_side = chain.back();
  const int feat_count = bb.feature_channels * feat_side * feat_side;

  main_.add(std::move(bb.body));
  main_.add(std::make_unique<nn::Flatten>("flatten"));
  rng::Stream head_init(config.rng_seed, "vae/heads/init");
  main_.add(std::make_unique<nn::Linear>("mu", feat_count, config.latent_dims,
                                         head_init));
  mu_index_ = main_.layer_count() - 1;
  logvar_ = std::make_unique<nn::Linear>("logvar", feat_count,
                                         config.latent_dims, head_init);

  rng::Stream dec_init(config.rng_seed, "vae/decoder/init");
  main_.add(std::make_unique<nn::Linear>("dec_fc", config.latent_dims,
                                         feat_count, dec_init));
  main_.add(std::make_unique<nn::ReLU>("dec_relu"));
  main_.add(std::make_unique<nn::Reshape>("dec_reshape", bb.feature_channels,
                                          feat_side, feat_side));
  const std::vector<int> dchan = decoder_channels(backbone.architecture);
  for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
    const int cur = chain[chain.size() - 1 - j];
    const int nxt = chain[chain.size() - 2 - j];
    const int kernel = nxt - 2 * cur + 4;  // stride 2, pad 1
    main_.add(std::make_unique<nn::ConvTranspose2d>(
        "dec_up" + std::to_string(j), dchan[j], dchan[j + 1], kernel, 2, 1,
        dec_init));
    if (j + 2 < chain.size()) {
      main_.add(std::make_unique<nn::ReLU>("dec_up" + std::to_string(j) +
                                           "_relu"));
    }
  }
  main_.add(std::make_unique<nn::Sigmoid>("dec_out"));
}

TrainLog Vae::train(const dataset::SplitManifest& split,
                    const std::vector<dataset::TileRecord>& tiles) {
  const TileIndex index(tiles);
  const std::vector<std::string> ids = apply_data_fraction(
      split.vae_train, config_.data_fraction, config_.rng_seed);
  const std::vector<const dataset::TileRecord*> data = index.gather(ids);
  for (const auto* tile : data) {
    if (tile->presence) {
      throw ValidationError(
          "vae training stream contains presence-positive tile '" +
          tile->tile_id + "'; vae_train must be panel-free");
    }
  }

  std::vector<nn::ParamRef> params;
  main_.collect_params(params);
  logvar_->collect_params(params);

  rng::Stream eps_stream(config_.rng_seed, "vae/eps");
  const double w = config_.reconstruction_weight;
  const int layer_count = main_.layer_count();

  const auto step = [this, &eps_stream, w, layer_count](
                        const std::vector<const dataset::TileRecord*>& batch)
      -> std::vector<std::pair<std::string, double>> {
    main_.zero_grad();
    logvar_->zero_grad();
    const nn::Tensor x = tiles_to_tensor(batch);

    nn::Tensor h = x;
    for (int i = 0; i < mu_index_; ++i) h = main_.layer(i).forward(h, true);
    const nn::Tensor mu = main_.layer(mu_index_).forward(h, true);
    const nn::Tensor logvar = logvar_->forward(h, true);
    nn::Tensor eps(mu.shape);
    for (double& e : eps.data) e = eps_stream.normal();
    const nn::Tensor z = reparameterize(mu, logvar, eps);
    nn::Tensor recon = z;
    for (int i = mu_index_ + 1; i < layer_count; ++i) {
      recon = main_.layer(i).forward(recon, true);
    }

    const nn::LossResult mse = nn::mse_loss(recon, x);
    const nn::KlResult kl = nn::kl_divergence(mu, logvar);
    const double total = w * mse.value + (1.0 - w) * kl.value;

    nn::Tensor g = mse.grad;
    for (double& v : g.data) v *= w;
    for (int i = layer_count - 1; i > mu_index_; --i) {
      g = main_.layer(i).backward(g, nullptr);
    }
    // g is now dL/dz. z = mu + exp(0.5*logvar) * eps.
    nn::Tensor gmu = g;
    nn::Tensor glv(logvar.shape);
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      gmu.data[i] += (1.0 - w) * kl.grad_mu.data[i];
      glv.data[i] = g.data[i] * eps.data[i] * 0.5 *
                        std::exp(0.5 * logvar.data[i]) +
                    (1.0 - w) * kl.grad_logvar.data[i];
    }
    nn::Tensor gh = main_.layer(mu_index_).backward(gmu, nullptr);
    const nn::Tensor gh2 = logvar_->backward(glv, nullptr);
    for (std::size_t i = 0; i < gh.data.size(); ++i) gh.data[i] += gh2.data[i];
    for (int i = mu_index_ - 1; i >= 0; --i) {
      gh = main_.layer(i).backward(gh, nullptr);
    }
    return {{"mse", mse.value}, {"kl", kl.value}, {"total", total}};
  };

  return run_training_loop(data, config_, "vae", params, step);
}

double Vae::reconstruction_mse(const dataset::TileRecord& tile) {
  const nn::Tensor x = tile_to_tensor(tile);
  const nn::Tensor recon = main_.forward(x, false);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double d = recon.data[i] - x.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.data.size());
}

AnomalyNormalizer Vae::calibrate_normalizer(
    const dataset::SplitManifest& split,
    const std::vector<dataset::TileRecord>& tiles) {
  if (split.validation.empty()) {
    throw ValidationError(
        "normalizer calibration requires a non-empty validation split");
  }
  if (split.validation.size() < 2) {
    throw ValidationError(
        "normalizer calibration requires at least two validation tiles; a "
        "single loss cannot span a min/max range");
  }
  const TileIndex index(tiles);
  AnomalyNormalizer norm;
  norm.min_loss = std::numeric_limits<double>::infinity();
  norm.max_loss = -std::numeric_limits<double>::infinity();
  for (const auto& id : split.validation) {
    const double loss = reconstruction_mse(index.at(id));
    norm.min_loss = std::min(norm.min_loss, loss);
    norm.max_loss = std::max(norm.max_loss, loss);
  }
  if (!(norm.min_loss < norm.max_loss)) {
    throw ExecutionError(
        "normalizer calibration degenerate: validation reconstruction losses "
        "are all equal (" +
        std::to_string(norm.min_loss) + ")");
  }
  return norm;
}

double Vae::anomaly_score(const AnomalyNormalizer& normalizer,
                          const dataset::TileRecord& tile) {
  if (!(normalizer.min_loss < normalizer.max_loss)) {
    throw ValidationError("anomaly_score: normalizer min must be below max");
  }
  const double mse = reconstruction_mse(tile);
  const double score = (mse - normalizer.min_loss) /
                       (normalizer.max_loss - normalizer.min_loss);
  return std::clamp(score, 0.0, 1.0);
}

cam::ActivationCapture Vae::capture(const dataset::TileRecord& tile,
                                    bool fullgrad_aux) {
  return cam::capture(main_, feature_layer(), tile_to_tensor(tile),
                      cam::Target::ReconstructionError, fullgrad_aux,
                      tile.tile_id);
}

void Vae::save(const std::filesystem::path& path,
               const std::optional<AnomalyNormalizer>& normalizer) {
  ArtifactHeader header;
  header.method = Method::Vae;
  header.architecture = backbone_.architecture;
  header.config = config_;
  header.git_describe = kGitDescribe;
  std::vector<nn::ParamRef> state;
  main_.collect_state(state);
  logvar_->collect_state(state);
  std::map<std::string, double> scalars;
  scalars["tile_size"] = tile_size_;
  if (normalizer) {
    scalars["normalizer_min"] = normalizer->min_loss;
    scalars["normalizer_max"] = normalizer->max_loss;
  }
  write_artifact(path, header, state, scalars);
}

LoadedVae Vae::load(const std::filesystem::path& path) {
  const LoadedArtifact art = read_artifact(path);
  if (art.header.method != Method::Vae) {
    throw ExecutionError("artifact at " + path.string() + " is a " +
                         method_name(art.header.method) + " model, not a vae");
  }
  BackboneConfig backbone;
  backbone.architecture = art.header.architecture;
  const auto ts = art.scalars.find("tile_size");
  const int tile_size = ts != art.scalars.end()
                            ? static_cast<int>(ts->second)
                            : dataset::kTileSize;
  Vae model(backbone, art.header.config, tile_size);
  std::vector<nn::ParamRef> state;
  model.main_.collect_state(state);
  model.logvar_->collect_state(state);
  load_state(art, state);
  std::optional<AnomalyNormalizer> normalizer;
  const auto lo = art.scalars.find("normalizer_min");
  const auto hi = art.scalars.find("normalizer_max");
  if (lo != art.scalars.end() && hi != art.scalars.end()) {
    normalizer = AnomalyNormalizer{lo->second, hi->second};
  }
  return LoadedVae{std::move(model), normalizer};
}

}  // namespace supbench::models
