#include "supbench/dataset/splits.hpp"

#include <unordered_set>

#include "supbench/core/errors.hpp"
#include "supbench/core/rng.hpp"

namespace supbench::dataset {

SplitManifest build_splits(const std::vector<TileRecord>& tiles,
                           std::uint64_t seed) {
  if (tiles.empty()) throw ValidationError("cannot split an empty tile set");

  std::vector<std::string> ids;
  ids.reserve(tiles.size());
  std::unordered_set<std::string> positive;
  for (const auto& tile : tiles) {
    ids.push_back(tile.tile_id);
    if (tile.presence) positive.insert(tile.tile_id);
  }

  rng::Stream stream(seed, "split-shuffle");
  stream.shuffle(ids);

  const std::size_t n = ids.size();
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_train_val = n * 9 / 10;

  SplitManifest manifest;
  manifest.seed = seed;
  manifest.train.assign(ids.begin(), ids.begin() + n_train);
  manifest.validation.assign(ids.begin() + n_train, ids.begin() + n_train_val);
  manifest.test.assign(ids.begin() + n_train_val, ids.end());
  for (const auto& id : manifest.train) {
    if (!positive.count(id)) manifest.vae_train.push_back(id);
  }
  return manifest;
}

}  // namespace supbench::dataset
