#pragma once

#include <cstdint>
#include <vector>

#include "supbench/dataset/types.hpp"

namespace supbench::dataset {

// Deterministic 80-10-10 split at tile level (uniform, unstratified).
// Sizes use integer arithmetic: |train| = floor(0.8 n),
// |val| = floor(0.9 n) - |train|, |test| = n - floor(0.9 n).
// vae_train is train with all presence-positive tiles removed.
SplitManifest build_splits(const std::vector<TileRecord>& tiles,
                           std::uint64_t seed);

}  // namespace supbench::dataset
