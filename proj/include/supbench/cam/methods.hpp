#pragma once

#include <string>
#include <vector>

#include "supbench/cam/capture.hpp"
#include "supbench/cam/heatmap.hpp"

namespace supbench::cam {

enum class CamMethod {
  GradCam,
  GradCamPp,
  HiResCam,
  FullGrad,
  EigenCam,
  EigenGradCam,
};

const std::vector<CamMethod>& all_cam_methods();
std::string cam_method_name(CamMethod m);
// Unknown name is a hard error listing the valid spellings.
CamMethod cam_method_from_name(const std::string& name);

// Unnormalized activation map at feature resolution (input resolution for
// FullGrad).
struct RawMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major

  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

RawMap compute_cam(const ActivationCapture& capture, CamMethod method);

// Bilinear upsample (corner alignment off) to the target resolution followed
// by min-max normalization to [0, 1]; a constant raw map degenerates to an
// all-zero heatmap.
Heatmap upsample_and_normalize(const RawMap& raw, int target_width,
                               int target_height,
                               const std::string& source_method,
                               const std::string& tile_id);

// compute_cam followed by upsample_and_normalize.
Heatmap compute_heatmap(const ActivationCapture& capture, CamMethod method,
                        int target_width, int target_height);

}  // namespace supbench::cam
