#include "supbench/models/training.hpp"

#include <chrono>
#include <cmath>

#include "supbench/core/errors.hpp"
#include "supbench/core/rng.hpp"
#include "supbench/core/tsv.hpp"
#include "supbench/nn/optim.hpp"

namespace supbench::models {

void write_train_log(const std::filesystem::path& path, const TrainLog& log) {
  std::vector<std::string> lines;
  std::vector<std::string> header = {"epoch"};
  if (!log.empty()) {
    for (const auto& [name, value] : log.front().mean_losses) {
      header.push_back(name);
    }
  }
  header.push_back("seconds");
  lines.push_back("# " + tsv::join(header));
  for (const auto& entry : log) {
    std::vector<std::string> fields = {std::to_string(entry.epoch)};
    for (const auto& [name, value] : entry.mean_losses) {
      fields.push_back(tsv::format_number(value));
    }
    fields.push_back(tsv::format_number(entry.seconds));
    lines.push_back(tsv::join(fields));
  }
  tsv::write_lines(path, lines);
}

TileIndex::TileIndex(const std::vector<dataset::TileRecord>& tiles) {
  map_.reserve(tiles.size());
  for (const auto& t : tiles) map_.emplace(t.tile_id, &t);
}

const dataset::TileRecord& TileIndex::at(const std::string& tile_id) const {
  const auto it = map_.find(tile_id);
  if (it == map_.end()) {
    throw ValidationError("split references tile '" + tile_id +
                          "' which is not present in the dataset");
  }
  return *it->second;
}

std::vector<const dataset::TileRecord*> TileIndex::gather(
    const std::vector<std::string>& ids) const {
  std::vector<const dataset::TileRecord*> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(&at(id));
  return out;
}

nn::Tensor tiles_to_tensor(
    const std::vector<const dataset::TileRecord*>& batch) {
  if (batch.empty()) throw ValidationError("cannot batch zero tiles");
  const auto& first = batch.front()->image;
  nn::Tensor x({static_cast<int>(batch.size()), 3, first.height, first.width});
  double* dst = x.data.data();
  for (const auto* tile : batch) {
    const auto& im = tile->image;
    if (im.channels != 3 || im.width != first.width ||
        im.height != first.height) {
      throw ValidationError("tile '" + tile->tile_id +
                            "' has inconsistent raster geometry");
    }
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < im.height; ++y) {
        for (int xp = 0; xp < im.width; ++xp) {
          *dst++ = im.at(xp, y, c) / 255.0;
        }
      }
    }
  }
  return x;
}

nn::Tensor tile_to_tensor(const dataset::TileRecord& tile) {
  return tiles_to_tensor({&tile});
}

TrainLog run_training_loop(const std::vector<const dataset::TileRecord*>& data,
                           const TrainConfig& config,
                           const std::string& stream_prefix,
                           std::vector<nn::ParamRef> params,
                           const TrainStepFn& step) {
  if (data.empty()) {
    throw ValidationError("training requires a non-empty train split");
  }
  validate_train_config(config);

  nn::Optimizer optimizer(config.optimizer, config.learning_rate);
  rng::Stream shuffle(config.rng_seed, stream_prefix + "/shuffle");

  TrainLog log;
  log.reserve(static_cast<std::size_t>(config.epochs));
  std::vector<const dataset::TileRecord*> order(data);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    shuffle.shuffle(order);

    std::vector<std::string> names;
    std::vector<double> sums;
    int batches = 0;
    for (std::size_t at = 0; at < order.size();
         at += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          order.size(), at + static_cast<std::size_t>(config.batch_size));
      const std::vector<const dataset::TileRecord*> batch(
          order.begin() + static_cast<std::ptrdiff_t>(at),
          order.begin() + static_cast<std::ptrdiff_t>(end));
      const auto losses = step(batch);
      for (std::size_t i = 0; i < losses.size(); ++i) {
        const auto& [name, value] = losses[i];
        if (!std::isfinite(value)) {
          throw ExecutionError(
              "training aborted: non-finite loss component '" + name +
              "' = " + std::to_string(value) + " at epoch " +
              std::to_string(epoch) + ", batch " + std::to_string(batches) +
              " (stream " + stream_prefix + ")");
        }
        if (i >= names.size()) {
          names.push_back(name);
          sums.push_back(0.0);
        }
        sums[i] += value;
      }
      ++batches;
      optimizer.step(params);
    }

    EpochLog entry;
    entry.epoch = epoch;
    for (std::size_t i = 0; i < names.size(); ++i) {
      entry.mean_losses.emplace_back(names[i], sums[i] / batches);
    }
    entry.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    log.push_back(std::move(entry));
  }
  optimizer.finalize(params);
  return log;
}

}  // namespace supbench::models
