#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "supbench/core/errors.hpp"
#include "supbench/core/rng.hpp"
#include "supbench/dataset/io.hpp"
#include "supbench/dataset/splits.hpp"
#include "supbench/dataset/synthetic.hpp"
#include "supbench/dataset/tiling.hpp"

using namespace supbench;
using dataset::SceneRecord;
using dataset::TileRecord;

namespace {

SceneRecord make_scene(const std::string& id, int size) {
  SceneRecord s;
  s.scene_id = id;
  s.city = "testville";
  s.image = img::make_image(size, size, 3);
  return s;
}

void add_rect(SceneRecord& s, const std::string& pid, double x, double y,
              double w, double h) {
  dataset::PolygonAnnotation a;
  a.polygon_id = pid;
  a.vertices = {{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}};
  s.polygons.push_back(a);
}

}  // namespace

TEST_CASE("clean_empty_scenes keeps only annotated scenes, in order") {
  std::vector<SceneRecord> scenes;
  scenes.push_back(make_scene("a", 200));
  scenes.push_back(make_scene("b", 200));
  add_rect(scenes[1], "p0", 10, 10, 20, 20);
  scenes.push_back(make_scene("c", 200));
  add_rect(scenes[2], "p0", 10, 10, 20, 20);

  auto cleaned = dataset::clean_empty_scenes(scenes);
  REQUIRE(cleaned.size() == 2);
  CHECK(cleaned[0].scene_id == "b");
  CHECK(cleaned[1].scene_id == "c");

  CHECK(dataset::clean_empty_scenes({}).empty());
}

TEST_CASE("tile_scene: counts, order, identity tile") {
  auto small = make_scene("one", 200);
  add_rect(small, "p0", 50, 50, 30, 30);
  auto tiles = dataset::tile_scene(small);
  REQUIRE(tiles.size() == 1);
  CHECK(tiles[0].grid_row == 0);
  CHECK(tiles[0].grid_col == 0);
  CHECK(tiles[0].presence);
  REQUIRE(tiles[0].polygons.size() == 1);
  CHECK(tiles[0].tile_id == "one_r000_c000");

  auto big = make_scene("big", 1000);
  auto grid = dataset::tile_scene(big);
  CHECK(grid.size() == 25);
  CHECK(grid[7].grid_row == 1);  // row-major
  CHECK(grid[7].grid_col == 2);

  CHECK_THROWS_AS(dataset::tile_scene(big, 0), ValidationError);
}

TEST_CASE("tile_scene clips straddling polygons and conserves pixels") {
  auto scene = make_scene("strad", 400);
  add_rect(scene, "p0", 180, 50, 60, 40);  // spans two tiles horizontally

  geom::Ring scene_poly = scene.polygons[0].vertices;
  const auto whole = geom::rasterized_area(scene_poly, 400, 400);
  REQUIRE(whole == 60 * 40);

  auto tiles = dataset::tile_scene(scene);
  std::size_t covered = 0, with_poly = 0;
  for (const auto& t : tiles) {
    for (const auto& p : t.polygons) {
      covered += geom::rasterized_area(p.vertices, 200, 200);
      ++with_poly;
    }
  }
  CHECK(with_poly == 2);
  CHECK(covered == whole);
}

TEST_CASE("tile pixels are an exact partition of the scene") {
  auto scene = make_scene("px", 400);
  rng::Stream s(9, "pixels");
  for (auto& v : scene.image.data) {
    v = static_cast<std::uint8_t>(s.uniform_int(0, 255));
  }
  auto tiles = dataset::tile_scene(scene);
  for (const auto& t : tiles) {
    for (int y = 0; y < 200; ++y) {
      for (int x = 0; x < 200; ++x) {
        for (int c = 0; c < 3; ++c) {
          CHECK(t.image.at(x, y, c) ==
                scene.image.at(t.grid_col * 200 + x, t.grid_row * 200 + y, c));
        }
      }
    }
  }
}

TEST_CASE("filter_small_polygons: area >= 5 and both dims >= 2") {
  auto scene = make_scene("filt", 200);
  add_rect(scene, "area4", 10, 10, 2, 2);    // 4 px^2 -> dropped
  add_rect(scene, "area5", 20, 20, 5, 1.8);  // sliver height < 2 -> dropped
  add_rect(scene, "area6", 30, 30, 3, 2);    // 6 px^2 -> kept
  add_rect(scene, "w1", 40, 40, 1, 20);      // width 1 -> dropped
  add_rect(scene, "w2", 60, 40, 2, 20);      // width 2 -> kept
  auto tiles = dataset::filter_small_polygons(dataset::tile_scene(scene));
  REQUIRE(tiles.size() == 1);
  std::set<std::string> kept;
  for (const auto& p : tiles[0].polygons) kept.insert(p.polygon_id);
  CHECK(kept == std::set<std::string>{"area6", "w2"});
  CHECK(tiles[0].presence);
  CHECK(tiles[0].boxes.size() == 2);
}

TEST_CASE("rasterize_ground_truth: boxes superset of polygons") {
  auto scene = make_scene("gt", 200);
  scene.polygons.push_back({});
  scene.polygons.back().polygon_id = "tri";
  scene.polygons.back().vertices = {{50, 50}, {60, 50}, {50, 60}};
  auto tiles = dataset::tile_scene(scene);
  REQUIRE(tiles.size() == 1);

  auto poly = dataset::rasterize_ground_truth(tiles[0],
                                              dataset::GroundTruthMode::Polygons);
  auto box = dataset::rasterize_ground_truth(tiles[0],
                                             dataset::GroundTruthMode::Boxes);
  CHECK(poly.count() == 45);
  CHECK(box.count() == 100);
  for (int y = 0; y < 200; ++y) {
    for (int x = 0; x < 200; ++x) {
      if (poly.at(x, y)) CHECK(box.at(x, y));
    }
  }

  TileRecord empty;
  empty.image = img::make_image(200, 200, 3);
  CHECK(dataset::rasterize_ground_truth(empty,
                                        dataset::GroundTruthMode::Polygons)
            .count() == 0);
}

TEST_CASE("build_splits: sizes, disjointness, vae subset, determinism") {
  std::vector<TileRecord> tiles(10);
  for (int i = 0; i < 10; ++i) {
    tiles[i].tile_id = "t" + std::to_string(i);
    tiles[i].presence = (i % 3 == 0);
  }
  auto m = dataset::build_splits(tiles, 7);
  CHECK(m.train.size() == 8);
  CHECK(m.validation.size() == 1);
  CHECK(m.test.size() == 1);

  std::set<std::string> all;
  for (const auto& v : {m.train, m.validation, m.test}) {
    for (const auto& id : v) all.insert(id);
  }
  CHECK(all.size() == 10);

  std::set<std::string> train_set(m.train.begin(), m.train.end());
  for (const auto& id : m.vae_train) {
    CHECK(train_set.count(id) == 1);
    const int idx = std::stoi(id.substr(1));
    CHECK(!tiles[idx].presence);
  }

  auto m2 = dataset::build_splits(tiles, 7);
  CHECK(m2.train == m.train);
  CHECK(m2.vae_train == m.vae_train);
  auto m3 = dataset::build_splits(tiles, 8);
  CHECK(m3.train != m.train);

  CHECK_THROWS_AS(dataset::build_splits({}, 1), ValidationError);
}

TEST_CASE("split sizes match the integer-arithmetic contract at paper scale") {
  // 289,375 tiles -> |train| 231,500; |val| 28,937; |test| 28,938.
  const long n = 289375;
  const long train = n * 8 / 10;
  const long trainval = n * 9 / 10;
  CHECK(train == 231500);
  CHECK(trainval - train == 28937);
  CHECK(n - trainval == 28938);
}

TEST_CASE("synthetic generation: determinism, density, annotations") {
  dataset::SyntheticSpec spec;
  spec.n_scenes = 2;
  spec.scene_size = 400;
  spec.panel_density = 6.0;
  spec.rng_seed = 11;

  auto a = dataset::generate_synthetic_dataset(spec);
  auto b = dataset::generate_synthetic_dataset(spec);
  REQUIRE(a.size() == 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].image.data == b[i].image.data);
    CHECK(a[i].polygons.size() == b[i].polygons.size());
  }

  std::size_t total = 0;
  for (const auto& s : a) total += s.polygons.size();
  CHECK(total >= 4);  // Poisson(6) twice; zero total would be astronomical

  dataset::SyntheticSpec none = spec;
  none.panel_density = 0.0;
  for (const auto& s : dataset::generate_synthetic_dataset(none)) {
    CHECK(s.polygons.empty());
  }

  dataset::SyntheticSpec bad = spec;
  bad.scene_size = 250;  // not divisible by tile size
  CHECK_THROWS_AS(dataset::generate_synthetic_dataset(bad), ValidationError);
}

TEST_CASE("synthetic panels carry valid annotations inside the scene") {
  dataset::SyntheticSpec spec;
  spec.n_scenes = 1;
  spec.scene_size = 600;
  spec.panel_density = 8.0;
  spec.rng_seed = 3;
  auto scenes = dataset::generate_synthetic_dataset(spec);
  for (const auto& p : scenes[0].polygons) {
    REQUIRE(p.vertices.size() >= 3);
    auto bb = geom::bounding_box(p.vertices);
    CHECK(bb.x1 >= 0);
    CHECK(bb.y1 >= 0);
    CHECK(bb.x2 <= 600);
    CHECK(bb.y2 <= 600);
    CHECK(geom::rasterized_area(p.vertices, 600, 600) >= 5);
  }
}

TEST_CASE("tile round-trip through the on-disk manifest") {
  const auto dir =
      std::filesystem::temp_directory_path() / "supbench-dataset-test";
  std::filesystem::remove_all(dir);

  dataset::SyntheticSpec spec;
  spec.n_scenes = 1;
  spec.scene_size = 400;
  spec.panel_density = 5.0;
  spec.rng_seed = 21;
  auto scenes = dataset::generate_synthetic_dataset(spec);

  std::vector<TileRecord> tiles;
  for (const auto& s : scenes) {
    auto t = dataset::tile_scene(s);
    tiles.insert(tiles.end(), t.begin(), t.end());
  }
  tiles = dataset::filter_small_polygons(std::move(tiles));

  dataset::write_tiles(dir, tiles);
  auto loaded = dataset::read_tiles(dir);
  REQUIRE(loaded.size() == tiles.size());
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    CHECK(loaded[i].tile_id == tiles[i].tile_id);
    CHECK(loaded[i].presence == tiles[i].presence);
    CHECK(loaded[i].image.data == tiles[i].image.data);
    REQUIRE(loaded[i].polygons.size() == tiles[i].polygons.size());
    for (std::size_t j = 0; j < tiles[i].polygons.size(); ++j) {
      REQUIRE(loaded[i].polygons[j].vertices.size() ==
              tiles[i].polygons[j].vertices.size());
      for (std::size_t k = 0; k < tiles[i].polygons[j].vertices.size(); ++k) {
        CHECK(loaded[i].polygons[j].vertices[k].x ==
              tiles[i].polygons[j].vertices[k].x);
        CHECK(loaded[i].polygons[j].vertices[k].y ==
              tiles[i].polygons[j].vertices[k].y);
      }
    }
  }

  auto m = dataset::build_splits(tiles, 5);
  dataset::write_splits(dir / "splits.tsv", m);
  auto m2 = dataset::read_splits(dir / "splits.tsv");
  CHECK(m2.train == m.train);
  CHECK(m2.validation == m.validation);
  CHECK(m2.test == m.test);
  CHECK(m2.vae_train == m.vae_train);
  CHECK(m2.seed == m.seed);
  std::filesystem::remove_all(dir);
}

TEST_CASE("ingest_scenes reads images + annotations and validates references") {
  const auto dir =
      std::filesystem::temp_directory_path() / "supbench-ingest-test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  auto scene = make_scene("austin_001", 200);
  img::write_pnm(dir / "austin_001.ppm", scene.image);
  {
    std::vector<SceneRecord> annotated{scene};
    add_rect(annotated[0], "p0", 10, 10, 30, 30);
    dataset::write_annotation_file(dir / "annotations.tsv", annotated);
  }
  auto scenes = dataset::ingest_scenes(dir, dir / "annotations.tsv");
  REQUIRE(scenes.size() == 1);
  CHECK(scenes[0].scene_id == "austin_001");
  CHECK(scenes[0].city == "austin");
  REQUIRE(scenes[0].polygons.size() == 1);
  CHECK(scenes[0].polygons[0].vertices.size() == 4);
  CHECK(scenes[0].polygons[0].vertices[2].x == 40.0);

  // Annotation for a scene with no image file is a hard error naming it.
  auto ghost = make_scene("ghost_9", 200);
  std::vector<SceneRecord> bad{ghost};
  add_rect(bad[0], "p0", 1, 1, 5, 5);
  dataset::write_annotation_file(dir / "bad.tsv", bad);
  CHECK_THROWS_WITH_AS(dataset::ingest_scenes(dir, dir / "bad.tsv"),
                       doctest::Contains("ghost_9"), ValidationError);
  std::filesystem::remove_all(dir);
}
