#pragma once

#include <vector>

#include "supbench/dataset/types.hpp"

namespace supbench::dataset {

// Drops scenes without any polygon annotation; keeps input order.
std::vector<SceneRecord> clean_empty_scenes(std::vector<SceneRecord> scenes);

// Splits a scene into non-overlapping tile_size x tile_size tiles in
// row-major order. Scene dimensions that do not divide evenly are cropped at
// the bottom/right edge. Polygons are clipped per tile (Sutherland-Hodgman)
// and re-expressed in tile-local coordinates; zero-area clip results are
// discarded. Presence and boxes are recomputed per tile.
std::vector<TileRecord> tile_scene(const SceneRecord& scene,
                                   int tile_size = kTileSize);

// Removes polygons with rasterized area < 5 px^2 or a bounding-box dimension
// < 2 px, then recomputes presence and boxes. Tiles are never dropped.
std::vector<TileRecord> filter_small_polygons(std::vector<TileRecord> tiles);

enum class GroundTruthMode { Polygons, Boxes };

// Rasterizes the tile's annotations into a tile_size^2 boolean grid. Boxes
// mode fills each polygon's bounding box and is a superset of polygons mode.
geom::GridMask rasterize_ground_truth(const TileRecord& tile,
                                      GroundTruthMode mode);

// Recomputes `presence` and `boxes` from the polygon list. Exposed because
// tiling, filtering and the synthetic generator all share it.
void refresh_derived_fields(TileRecord& tile);

}  // namespace supbench::dataset
