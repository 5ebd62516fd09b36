#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace supbench::cam {

// Per-tile continuous localization map in [0, 1].
struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major
  std::string source_method;
  std::string tile_id;

  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

// Persisted as 8-bit PGM plus a sidecar "<path>.minmax.txt" holding the
// original min/max so the quantized levels recover exactly.
void write_heatmap(const std::filesystem::path& pgm_path, const Heatmap& map);
Heatmap read_heatmap(const std::filesystem::path& pgm_path);

}  // namespace supbench::cam
