#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "supbench/dataset/types.hpp"

namespace supbench::dataset {

// Reads scene images (*.ppm, scene_id = file stem, city = stem prefix up to
// the first '_' when present) and attaches polygons from the annotation
// file. Annotation lines: scene_id <TAB> polygon_id <TAB> "x,y x,y ...".
// An annotation referencing a scene with no image file is a hard error.
std::vector<SceneRecord> ingest_scenes(
    const std::filesystem::path& root_path,
    const std::filesystem::path& annotation_file);

void write_annotation_file(const std::filesystem::path& path,
                           const std::vector<SceneRecord>& scenes);

// Persisted tiled dataset:
//   tiles/<tile_id>.ppm    tile images
//   manifest.tsv           tile_id, scene_id, row, col, presence, box list
//   polygons.tsv           tile_id, polygon_id, vertex list (tile-local)
//   splits.tsv             tile_id, split, vae flag (+ header comments)
void write_tiles(const std::filesystem::path& dir,
                 const std::vector<TileRecord>& tiles);
std::vector<TileRecord> read_tiles(const std::filesystem::path& dir,
                                   bool load_images = true);

void write_splits(const std::filesystem::path& path,
                  const SplitManifest& manifest);
SplitManifest read_splits(const std::filesystem::path& path);

}  // namespace supbench::dataset
