#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "supbench/dataset/types.hpp"
#include "supbench/models/config.hpp"
#include "supbench/nn/layers.hpp"
#include "supbench/nn/tensor.hpp"

namespace supbench::models {

struct EpochLog {
  int epoch = 0;
  std::vector<std::pair<std::string, double>> mean_losses;
  double seconds = 0.0;
};
using TrainLog = std::vector<EpochLog>;

// train_log.tsv: epoch, one column per loss component, wall-clock seconds.
void write_train_log(const std::filesystem::path& path, const TrainLog& log);

// tile_id -> record lookup; an id with no record is a hard error.
class TileIndex {
 public:
  explicit TileIndex(const std::vector<dataset::TileRecord>& tiles);
  const dataset::TileRecord& at(const std::string& tile_id) const;
  std::vector<const dataset::TileRecord*> gather(
      const std::vector<std::string>& ids) const;

 private:
  std::unordered_map<std::string, const dataset::TileRecord*> map_;
};

// (1, 3, H, W) / (N, 3, H, W) tensors with pixel values scaled to [0, 1].
nn::Tensor tile_to_tensor(const dataset::TileRecord& tile);
nn::Tensor tiles_to_tensor(const std::vector<const dataset::TileRecord*>& batch);

// One optimizer step's worth of work: zero grads, forward, backward. Returns
// named loss components for the batch.
using TrainStepFn =
    std::function<std::vector<std::pair<std::string, double>>(
        const std::vector<const dataset::TileRecord*>& batch)>;

// Standard epoch/batch scaffold: shuffles per epoch from the
// "<stream_prefix>/shuffle" stream, chunks into config.batch_size, invokes
// `step`, aborts on non-finite losses with a diagnostic, steps the optimizer,
// and records per-epoch loss means and wall-clock seconds. epochs == 0 runs
// zero optimizer steps. ASGD averages are installed at the end.
TrainLog run_training_loop(const std::vector<const dataset::TileRecord*>& data,
                           const TrainConfig& config,
                           const std::string& stream_prefix,
                           std::vector<nn::ParamRef> params,
                           const TrainStepFn& step);

}  // namespace supbench::models
