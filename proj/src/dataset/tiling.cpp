#include "supbench/dataset/tiling.hpp"

#include <algorithm>
#include <cstdio>

#include "supbench/core/errors.hpp"

namespace supbench::dataset {

std::vector<SceneRecord> clean_empty_scenes(std::vector<SceneRecord> scenes) {
  std::vector<SceneRecord> out;
  out.reserve(scenes.size());
  for (auto& scene : scenes) {
    if (!scene.polygons.empty()) out.push_back(std::move(scene));
  }
  return out;
}

void refresh_derived_fields(TileRecord& tile) {
  tile.boxes.clear();
  tile.boxes.reserve(tile.polygons.size());
  for (const auto& poly : tile.polygons)
    tile.boxes.push_back(geom::bounding_box(poly.vertices));
  tile.presence = !tile.polygons.empty();
}

std::vector<TileRecord> tile_scene(const SceneRecord& scene, int tile_size) {
  if (tile_size <= 0)
    throw ValidationError("tile_size must be positive");
  const int rows = scene.image.height / tile_size;
  const int cols = scene.image.width / tile_size;

  std::vector<TileRecord> tiles;
  tiles.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      TileRecord tile;
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%s_r%03d_c%03d", scene.scene_id.c_str(),
                    r, c);
      tile.tile_id = buf;
      tile.scene_id = scene.scene_id;
      tile.grid_row = r;
      tile.grid_col = c;

      tile.image = img::make_image(tile_size, tile_size, 3);
      const int x0 = c * tile_size;
      const int y0 = r * tile_size;
      for (int y = 0; y < tile_size; ++y) {
        const auto* src =
            &scene.image.data[((static_cast<std::size_t>(y0 + y)) *
                                   scene.image.width +
                               x0) *
                              3];
        std::copy(src, src + static_cast<std::size_t>(tile_size) * 3,
                  &tile.image.data[static_cast<std::size_t>(y) * tile_size * 3]);
      }

      const geom::BoxD tile_box{static_cast<double>(x0),
                                static_cast<double>(y0),
                                static_cast<double>(x0 + tile_size),
                                static_cast<double>(y0 + tile_size)};
      for (const auto& poly : scene.polygons) {
        geom::Ring clipped = geom::clip_to_box(poly.vertices, tile_box);
        if (clipped.size() < 3) continue;
        if (geom::signed_area(clipped) == 0.0) continue;
        for (auto& p : clipped) {
          p.x -= x0;
          p.y -= y0;
        }
        PolygonAnnotation local;
        local.polygon_id = poly.polygon_id;
        local.vertices = std::move(clipped);
        tile.polygons.push_back(std::move(local));
      }
      refresh_derived_fields(tile);
      tiles.push_back(std::move(tile));
    }
  }
  return tiles;
}

std::vector<TileRecord> filter_small_polygons(std::vector<TileRecord> tiles) {
  for (auto& tile : tiles) {
    const int side = tile.image.width;
    std::vector<PolygonAnnotation> kept;
    kept.reserve(tile.polygons.size());
    for (auto& poly : tile.polygons) {
      const geom::BoxD bb = geom::bounding_box(poly.vertices);
      if (bb.width() < 2.0 || bb.height() < 2.0) continue;
      if (geom::rasterized_area(poly.vertices, side, side) < 5) continue;
      kept.push_back(std::move(poly));
    }
    tile.polygons = std::move(kept);
    refresh_derived_fields(tile);
  }
  return tiles;
}

geom::GridMask rasterize_ground_truth(const TileRecord& tile,
                                      GroundTruthMode mode) {
  const int side = tile.image.width;
  geom::GridMask mask = geom::make_grid_mask(side, side);
  if (mode == GroundTruthMode::Polygons) {
    for (const auto& poly : tile.polygons)
      geom::fill_polygon(poly.vertices, mask);
  } else {
    for (const auto& box : tile.boxes) geom::fill_box(box, mask);
  }
  return mask;
}

}  // namespace supbench::dataset
