#pragma once

#include <vector>

#include "supbench/dataset/types.hpp"

namespace supbench::dataset {

// Generates desk-scale scenes: textured background, dark gridded "panel"
// rectangles (annotated with exact polygons), and unannotated distractors
// (bright pool rectangles, thin beams, dark shadows). Fully deterministic
// given spec.rng_seed. Throws when the requested density cannot be placed
// within bounded retries.
std::vector<SceneRecord> generate_synthetic_dataset(const SyntheticSpec& spec);

}  // namespace supbench::dataset
