#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "supbench/cam/heatmap.hpp"
#include "supbench/models/detection.hpp"

namespace supbench::localization {

// Thresholded binary localization map; the common currency of all methods.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // 0/1, row-major
  std::string tile_id;

  bool at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x] != 0;
  }
  std::size_t count() const;
};

BinaryMask make_mask(int width, int height, const std::string& tile_id = {});

// mask[p] = (heatmap[p] >= t). The >= comparison makes t = 0 an all-true
// mask, matching the threshold-0 sweep rows.
BinaryMask threshold_heatmap(const cam::Heatmap& heatmap, double t);

// Union of the pixel extents of all boxes with score >= t. Box extent uses
// half-open integer ranges [floor(x1), ceil(x2)) so fractional boxes never
// produce zero-width masks.
BinaryMask detections_to_mask(const std::vector<models::Detection>& detections,
                              double t, int width, int height,
                              const std::string& tile_id = {});

void write_mask(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask read_mask(const std::filesystem::path& path);

}  // namespace supbench::localization
