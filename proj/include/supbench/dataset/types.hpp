#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "supbench/core/geometry.hpp"
#include "supbench/core/image.hpp"

namespace supbench::dataset {

inline constexpr int kTileSize = 200;

struct PolygonAnnotation {
  std::string polygon_id;
  geom::Ring vertices;  // pixel coordinates, >= 3 vertices
};

struct SceneRecord {
  std::string scene_id;
  std::string city;
  img::ImageU8 image;  // 3-channel 8-bit
  std::vector<PolygonAnnotation> polygons;
};

struct TileRecord {
  std::string tile_id;
  std::string scene_id;
  int grid_row = 0;
  int grid_col = 0;
  img::ImageU8 image;  // tile_size x tile_size, 3 channels
  std::vector<PolygonAnnotation> polygons;  // clipped, tile-local coordinates
  std::vector<geom::BoxD> boxes;            // tight AABB per polygon
  bool presence = false;
};

struct SplitManifest {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::vector<std::string> vae_train;  // train minus presence-positive tiles
  std::uint64_t seed = 0;
};

// Desk-scale scene synthesis knobs. Distractor weights are expected counts
// per scene for each distractor family.
struct SyntheticSpec {
  int n_scenes = 4;
  int scene_size = 1000;
  double panel_density = 6.0;     // expected panels per scene
  double weight_pool = 1.0;       // bright rectangle
  double weight_beam = 1.0;       // thin bright beam
  double weight_shadow = 1.0;     // dark rectangle, no grid texture
  std::uint64_t rng_seed = 0;
};

}  // namespace supbench::dataset
