#include "supbench/dataset/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "supbench/core/errors.hpp"
#include "supbench/core/rng.hpp"

namespace supbench::dataset {

namespace {

struct Rect {
  int x = 0, y = 0, w = 0, h = 0;
  int x2() const { return x + w; }
  int y2() const { return y + h; }
};

bool overlaps(const Rect& a, const Rect& b, int margin) {
  return a.x < b.x2() + margin && b.x < a.x2() + margin &&
         a.y < b.y2() + margin && b.y < a.y2() + margin;
}

std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

void fill_rect(img::ImageU8& image, const Rect& r, double cr, double cg,
               double cb) {
  for (int y = r.y; y < r.y2(); ++y)
    for (int x = r.x; x < r.x2(); ++x) {
      image.at(x, y, 0) = clamp_u8(cr);
      image.at(x, y, 1) = clamp_u8(cg);
      image.at(x, y, 2) = clamp_u8(cb);
    }
}

void paint_background(img::ImageU8& image, rng::Stream& stream) {
  const int size = image.width;
  const double base = stream.uniform(150.0, 190.0);
  const double gx = stream.uniform(-25.0, 25.0);
  const double gy = stream.uniform(-25.0, 25.0);
  const double tint = stream.uniform(-12.0, 12.0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double grad = gx * (static_cast<double>(x) / size - 0.5) +
                          gy * (static_cast<double>(y) / size - 0.5);
      const double noise = stream.uniform(-10.0, 10.0);
      const double v = base + grad + noise;
      image.at(x, y, 0) = clamp_u8(v + tint);
      image.at(x, y, 1) = clamp_u8(v);
      image.at(x, y, 2) = clamp_u8(v - tint);
    }
  }
  // Faint large blocks: roofs and paved areas.
  const int blocks = static_cast<int>(stream.uniform_int(4, 9));
  for (int i = 0; i < blocks; ++i) {
    Rect r;
    r.w = static_cast<int>(stream.uniform_int(60, 180));
    r.h = static_cast<int>(stream.uniform_int(60, 180));
    r.x = static_cast<int>(stream.uniform_int(0, size - r.w));
    r.y = static_cast<int>(stream.uniform_int(0, size - r.h));
    const double shift = stream.uniform(-18.0, 18.0);
    for (int y = r.y; y < r.y2(); ++y)
      for (int x = r.x; x < r.x2(); ++x)
        for (int c = 0; c < 3; ++c)
          image.at(x, y, c) = clamp_u8(image.at(x, y, c) + shift);
  }
}

void paint_panel(img::ImageU8& image, const Rect& r, rng::Stream& stream) {
  const double body = stream.uniform(28.0, 52.0);
  fill_rect(image, r, body * 0.8, body * 0.9, body + 14.0);
  // Lighter cell grid every few pixels, plus a frame.
  const int pitch = static_cast<int>(stream.uniform_int(5, 9));
  const double line = body + stream.uniform(55.0, 80.0);
  for (int x = r.x; x < r.x2(); x += pitch)
    for (int y = r.y; y < r.y2(); ++y) {
      image.at(x, y, 0) = clamp_u8(line * 0.85);
      image.at(x, y, 1) = clamp_u8(line * 0.92);
      image.at(x, y, 2) = clamp_u8(line);
    }
  for (int y : {r.y, r.y2() - 1})
    for (int x = r.x; x < r.x2(); ++x) {
      image.at(x, y, 0) = clamp_u8(line * 0.85);
      image.at(x, y, 1) = clamp_u8(line * 0.92);
      image.at(x, y, 2) = clamp_u8(line);
    }
}

bool place_rect(Rect& r, int size, int w, int h,
                const std::vector<Rect>& occupied, rng::Stream& stream,
                int retries) {
  for (int attempt = 0; attempt < retries; ++attempt) {
    r.w = w;
    r.h = h;
    r.x = static_cast<int>(stream.uniform_int(2, size - w - 2));
    r.y = static_cast<int>(stream.uniform_int(2, size - h - 2));
    bool clash = false;
    for (const auto& o : occupied) {
      if (overlaps(r, o, 6)) {
        clash = true;
        break;
      }
    }
    if (!clash) return true;
  }
  return false;
}

}  // namespace

std::vector<SceneRecord> generate_synthetic_dataset(const SyntheticSpec& spec) {
  if (spec.scene_size <= 0 || spec.scene_size % kTileSize != 0)
    throw ValidationError("scene_size must be a positive multiple of " +
                          std::to_string(kTileSize));
  if (spec.panel_density < 0.0 || spec.weight_pool < 0.0 ||
      spec.weight_beam < 0.0 || spec.weight_shadow < 0.0)
    throw ValidationError("densities and distractor weights must be >= 0");

  constexpr int kPlacementRetries = 200;
  std::vector<SceneRecord> scenes;
  scenes.reserve(static_cast<std::size_t>(spec.n_scenes));

  for (int s = 0; s < spec.n_scenes; ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "synth_%04d", s);
    rng::Stream stream(spec.rng_seed, name);

    SceneRecord scene;
    scene.scene_id = name;
    scene.city = "synthetic";
    scene.image = img::make_image(spec.scene_size, spec.scene_size, 3);
    paint_background(scene.image, stream);

    std::vector<Rect> occupied;
    const int n_panels = stream.poisson(spec.panel_density);
    for (int k = 0; k < n_panels; ++k) {
      const int w = static_cast<int>(stream.uniform_int(16, 56));
      const int h = static_cast<int>(stream.uniform_int(14, 40));
      Rect r;
      if (!place_rect(r, spec.scene_size, w, h, occupied, stream,
                      kPlacementRetries))
        throw ExecutionError("panel placement failed after " +
                             std::to_string(kPlacementRetries) +
                             " retries; lower panel_density");
      occupied.push_back(r);
      paint_panel(scene.image, r, stream);

      PolygonAnnotation poly;
      poly.polygon_id = scene.scene_id + "_p" + std::to_string(k);
      poly.vertices = {{static_cast<double>(r.x), static_cast<double>(r.y)},
                       {static_cast<double>(r.x2()), static_cast<double>(r.y)},
                       {static_cast<double>(r.x2()), static_cast<double>(r.y2())},
                       {static_cast<double>(r.x), static_cast<double>(r.y2())}};
      scene.polygons.push_back(std::move(poly));
    }

    struct Family {
      double rate;
      int kind;
    };
    const Family families[] = {{spec.weight_pool, 0},
                               {spec.weight_beam, 1},
                               {spec.weight_shadow, 2}};
    for (const auto& family : families) {
      const int count = stream.poisson(family.rate);
      for (int k = 0; k < count; ++k) {
        Rect r;
        bool ok = false;
        if (family.kind == 0) {
          ok = place_rect(r, spec.scene_size,
                          static_cast<int>(stream.uniform_int(12, 40)),
                          static_cast<int>(stream.uniform_int(10, 30)),
                          occupied, stream, kPlacementRetries);
          if (ok) {
            const double b = stream.uniform(185.0, 230.0);
            fill_rect(scene.image, r, b * 0.55, b * 0.95, b);
          }
        } else if (family.kind == 1) {
          const bool horizontal = stream.uniform() < 0.5;
          const int len = static_cast<int>(stream.uniform_int(40, 120));
          const int thick = static_cast<int>(stream.uniform_int(2, 4));
          ok = place_rect(r, spec.scene_size, horizontal ? len : thick,
                          horizontal ? thick : len, occupied, stream,
                          kPlacementRetries);
          if (ok) {
            const double b = stream.uniform(200.0, 240.0);
            fill_rect(scene.image, r, b, b, b * 0.92);
          }
        } else {
          ok = place_rect(r, spec.scene_size,
                          static_cast<int>(stream.uniform_int(14, 50)),
                          static_cast<int>(stream.uniform_int(12, 40)),
                          occupied, stream, kPlacementRetries);
          if (ok) {
            const double b = stream.uniform(58.0, 88.0);
            fill_rect(scene.image, r, b, b, b * 1.05);
          }
        }
        if (!ok)
          throw ExecutionError(
              "distractor placement failed after bounded retries; lower "
              "distractor weights");
        occupied.push_back(r);
      }
    }

    scenes.push_back(std::move(scene));
  }
  return scenes;
}

}  // namespace supbench::dataset
