#include "supbench/dataset/io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "supbench/core/errors.hpp"
#include "supbench/core/tsv.hpp"
#include "supbench/dataset/tiling.hpp"

namespace fs = std::filesystem;

namespace supbench::dataset {

namespace {

std::string format_ring(const geom::Ring& ring) {
  std::string out;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    if (i) out.push_back(' ');
    out += tsv::format_exact(ring[i].x);
    out.push_back(',');
    out += tsv::format_exact(ring[i].y);
  }
  return out;
}

geom::Ring parse_ring(const std::string& text, const std::string& context) {
  geom::Ring ring;
  std::istringstream in(text);
  std::string pair;
  while (in >> pair) {
    const auto comma = pair.find(',');
    if (comma == std::string::npos)
      throw ValidationError("malformed vertex '" + pair + "' in " + context);
    geom::PointD p;
    p.x = tsv::parse_number(pair.substr(0, comma), context);
    p.y = tsv::parse_number(pair.substr(comma + 1), context);
    ring.push_back(p);
  }
  if (ring.size() < 3)
    throw ValidationError("polygon with fewer than 3 vertices in " + context);
  return ring;
}

std::string city_from_scene_id(const std::string& scene_id) {
  const auto underscore = scene_id.find('_');
  if (underscore == std::string::npos || underscore == 0) return "unknown";
  return scene_id.substr(0, underscore);
}

}  // namespace

std::vector<SceneRecord> ingest_scenes(const fs::path& root_path,
                                       const fs::path& annotation_file) {
  if (!fs::is_directory(root_path))
    throw ValidationError("scene root is not a directory: " +
                          root_path.string());

  std::map<std::string, fs::path> image_paths;  // sorted by scene_id
  for (const auto& entry : fs::directory_iterator(root_path)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".ppm" || ext == ".pgm")
      image_paths.emplace(entry.path().stem().string(), entry.path());
  }

  std::map<std::string, std::vector<PolygonAnnotation>> annotations;
  {
    std::ifstream in(annotation_file);
    if (!in)
      throw ValidationError("cannot open annotation file: " +
                            annotation_file.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto fields = tsv::split(line);
      if (fields.size() != 3)
        throw ValidationError("annotation line " + std::to_string(line_no) +
                              ": expected 3 tab-separated fields");
      PolygonAnnotation poly;
      poly.polygon_id = fields[1];
      poly.vertices = parse_ring(
          fields[2], "annotation line " + std::to_string(line_no));
      annotations[fields[0]].push_back(std::move(poly));
    }
  }

  for (const auto& [scene_id, polys] : annotations) {
    if (!image_paths.count(scene_id))
      throw ValidationError("annotation references scene '" + scene_id +
                            "' but no image file exists for it");
  }

  std::vector<SceneRecord> scenes;
  scenes.reserve(image_paths.size());
  for (const auto& [scene_id, path] : image_paths) {
    SceneRecord scene;
    scene.scene_id = scene_id;
    scene.city = city_from_scene_id(scene_id);
    scene.image = img::read_pnm(path);
    if (auto it = annotations.find(scene_id); it != annotations.end())
      scene.polygons = std::move(it->second);
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

void write_annotation_file(const fs::path& path,
                           const std::vector<SceneRecord>& scenes) {
  std::vector<std::string> lines;
  for (const auto& scene : scenes)
    for (const auto& poly : scene.polygons)
      lines.push_back(tsv::join(
          {scene.scene_id, poly.polygon_id, format_ring(poly.vertices)}));
  tsv::write_lines(path, lines);
}

namespace {

std::string format_boxes(const std::vector<geom::BoxD>& boxes) {
  std::string out;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (i) out.push_back(';');
    out += tsv::format_exact(boxes[i].x1) + "," + tsv::format_exact(boxes[i].y1) +
           "," + tsv::format_exact(boxes[i].x2) + "," +
           tsv::format_exact(boxes[i].y2);
  }
  return out;
}

}  // namespace

void write_tiles(const fs::path& dir, const std::vector<TileRecord>& tiles) {
  fs::create_directories(dir / "tiles");
  std::vector<std::string> manifest;
  manifest.push_back("tile_id\tscene_id\trow\tcol\tpresence\tboxes");
  std::vector<std::string> polygons;
  polygons.push_back("tile_id\tpolygon_id\tvertices");
  for (const auto& tile : tiles) {
    img::write_pnm(dir / "tiles" / (tile.tile_id + ".ppm"), tile.image);
    manifest.push_back(tsv::join({tile.tile_id, tile.scene_id,
                                  std::to_string(tile.grid_row),
                                  std::to_string(tile.grid_col),
                                  tile.presence ? "1" : "0",
                                  format_boxes(tile.boxes)}));
    for (const auto& poly : tile.polygons)
      polygons.push_back(tsv::join(
          {tile.tile_id, poly.polygon_id, format_ring(poly.vertices)}));
  }
  tsv::write_lines(dir / "manifest.tsv", manifest);
  tsv::write_lines(dir / "polygons.tsv", polygons);
}

std::vector<TileRecord> read_tiles(const fs::path& dir, bool load_images) {
  const auto manifest = tsv::read_table(dir / "manifest.tsv");
  std::map<std::string, std::vector<PolygonAnnotation>> polys_by_tile;
  const auto polygons = tsv::read_table(dir / "polygons.tsv");
  for (std::size_t i = 0; i < polygons.rows.size(); ++i) {
    const auto& row = polygons.rows[i];
    if (i == 0 && row.size() >= 1 && row[0] == "tile_id") continue;
    if (row.size() != 3)
      throw ExecutionError("malformed polygons.tsv row in " + dir.string());
    PolygonAnnotation poly;
    poly.polygon_id = row[1];
    poly.vertices = parse_ring(row[2], "polygons.tsv");
    polys_by_tile[row[0]].push_back(std::move(poly));
  }

  std::vector<TileRecord> tiles;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    const auto& row = manifest.rows[i];
    if (i == 0 && row.size() >= 1 && row[0] == "tile_id") continue;
    if (row.size() != 6)
      throw ExecutionError("malformed manifest.tsv row in " + dir.string());
    TileRecord tile;
    tile.tile_id = row[0];
    tile.scene_id = row[1];
    tile.grid_row = static_cast<int>(tsv::parse_number(row[2], "manifest row"));
    tile.grid_col = static_cast<int>(tsv::parse_number(row[3], "manifest col"));
    if (load_images)
      tile.image = img::read_pnm(dir / "tiles" / (tile.tile_id + ".ppm"));
    else
      tile.image = img::make_image(kTileSize, kTileSize, 3);
    if (auto it = polys_by_tile.find(tile.tile_id); it != polys_by_tile.end())
      tile.polygons = std::move(it->second);
    refresh_derived_fields(tile);
    const bool stored_presence = (row[4] == "1");
    if (stored_presence != tile.presence)
      throw ExecutionError("manifest presence flag disagrees with polygons "
                           "for tile " +
                           tile.tile_id);
    tiles.push_back(std::move(tile));
  }
  return tiles;
}

void write_splits(const fs::path& path, const SplitManifest& manifest) {
  std::vector<std::string> lines;
  lines.push_back("# seed=" + std::to_string(manifest.seed));
  lines.push_back("# policy=tile-level uniform shuffle, unstratified, 80-10-10");
  lines.push_back("tile_id\tsplit\tvae");
  std::unordered_set<std::string> vae(manifest.vae_train.begin(),
                                      manifest.vae_train.end());
  for (const auto& id : manifest.train)
    lines.push_back(tsv::join({id, "train", vae.count(id) ? "1" : "0"}));
  for (const auto& id : manifest.validation)
    lines.push_back(tsv::join({id, "val", "0"}));
  for (const auto& id : manifest.test)
    lines.push_back(tsv::join({id, "test", "0"}));
  tsv::write_lines(path, lines);
}

SplitManifest read_splits(const fs::path& path) {
  const auto table = tsv::read_table(path);
  SplitManifest manifest;
  for (const auto& comment : table.comments) {
    const std::string prefix = "# seed=";
    if (comment.rfind(prefix, 0) == 0)
      manifest.seed = std::stoull(comment.substr(prefix.size()));
  }
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (i == 0 && row.size() >= 1 && row[0] == "tile_id") continue;
    if (row.size() != 3)
      throw ExecutionError("malformed splits.tsv row in " + path.string());
    if (row[1] == "train") {
      manifest.train.push_back(row[0]);
      if (row[2] == "1") manifest.vae_train.push_back(row[0]);
    } else if (row[1] == "val") {
      manifest.validation.push_back(row[0]);
    } else if (row[1] == "test") {
      manifest.test.push_back(row[0]);
    } else {
      throw ExecutionError("unknown split '" + row[1] + "' in " +
                           path.string());
    }
  }
  return manifest;
}

}  // namespace supbench::dataset
