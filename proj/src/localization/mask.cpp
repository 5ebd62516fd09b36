#include "supbench/localization/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "supbench/core/errors.hpp"
#include "supbench/core/image.hpp"

namespace supbench::localization {

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(
      std::accumulate(values.begin(), values.end(), std::size_t{0}));
}

BinaryMask make_mask(int width, int height, const std::string& tile_id) {
  BinaryMask mask;
  mask.width = width;
  mask.height = height;
  mask.tile_id = tile_id;
  mask.values.assign(static_cast<std::size_t>(width) * height, 0);
  return mask;
}

BinaryMask threshold_heatmap(const cam::Heatmap& heatmap, double t) {
  if (t < 0.0 || t > 1.0)
    throw ValidationError("threshold must lie in [0,1], got " +
                          std::to_string(t));
  BinaryMask mask = make_mask(heatmap.width, heatmap.height, heatmap.tile_id);
  for (std::size_t i = 0; i < heatmap.values.size(); ++i)
    mask.values[i] = heatmap.values[i] >= t ? 1 : 0;
  return mask;
}

BinaryMask detections_to_mask(const std::vector<models::Detection>& detections,
                              double t, int width, int height,
                              const std::string& tile_id) {
  BinaryMask mask = make_mask(width, height, tile_id);
  for (const auto& det : detections) {
    if (det.score < t) continue;
    const int x_begin = std::max(0, static_cast<int>(std::floor(det.box.x1)));
    const int x_end = std::min(width, static_cast<int>(std::ceil(det.box.x2)));
    const int y_begin = std::max(0, static_cast<int>(std::floor(det.box.y1)));
    const int y_end = std::min(height, static_cast<int>(std::ceil(det.box.y2)));
    for (int y = y_begin; y < y_end; ++y)
      for (int x = x_begin; x < x_end; ++x)
        mask.values[static_cast<std::size_t>(y) * width + x] = 1;
  }
  return mask;
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  img::write_pbm(path, mask.width, mask.height, mask.values);
}

BinaryMask read_mask(const std::filesystem::path& path) {
  BinaryMask mask;
  mask.values = img::read_pbm(path, mask.width, mask.height);
  mask.tile_id = path.stem().string();
  return mask;
}

}  // namespace supbench::localization
