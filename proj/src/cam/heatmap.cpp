#include "supbench/cam/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "supbench/core/errors.hpp"
#include "supbench/core/image.hpp"
#include "supbench/core/tsv.hpp"

namespace supbench::cam {

void write_heatmap(const std::filesystem::path& pgm_path, const Heatmap& map) {
  double lo = 0.0, hi = 0.0;
  if (!map.values.empty()) {
    const auto [mn, mx] =
        std::minmax_element(map.values.begin(), map.values.end());
    lo = *mn;
    hi = *mx;
  }
  img::ImageU8 image = img::make_image(map.width, map.height, 1);
  const double range = hi - lo;
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const double t = range > 0.0 ? (map.values[i] - lo) / range : 0.0;
    image.data[i] = static_cast<std::uint8_t>(std::lround(t * 255.0));
  }
  img::write_pnm(pgm_path, image);

  std::ofstream side(pgm_path.string() + ".minmax.txt");
  if (!side)
    throw ExecutionError("cannot write sidecar for " + pgm_path.string());
  side << tsv::format_exact(lo) << ' ' << tsv::format_exact(hi) << '\n';
}

Heatmap read_heatmap(const std::filesystem::path& pgm_path) {
  const img::ImageU8 image = img::read_pnm(pgm_path);
  if (image.channels != 1)
    throw ExecutionError("heatmap must be single channel: " +
                         pgm_path.string());
  std::ifstream side(pgm_path.string() + ".minmax.txt");
  if (!side)
    throw ExecutionError("missing sidecar for " + pgm_path.string());
  double lo = 0.0, hi = 0.0;
  side >> lo >> hi;

  Heatmap map;
  map.width = image.width;
  map.height = image.height;
  map.tile_id = pgm_path.stem().string();
  map.values.resize(image.data.size());
  const double range = hi - lo;
  for (std::size_t i = 0; i < image.data.size(); ++i)
    map.values[i] = lo + (image.data[i] / 255.0) * range;
  return map;
}

}  // namespace supbench::cam
