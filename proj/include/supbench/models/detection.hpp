#pragma once

#include <optional>
#include <string>
#include <vector>

#include "supbench/core/geometry.hpp"

namespace supbench::models {

// Scored axis-aligned box in tile-local pixel coordinates.
struct Detection {
  geom::BoxD box;
  double score = 0.0;  // in [0, 1]
};

enum class Method { Detector, Classifier, Vae };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Persisted per-tile output keyed by method and run. Detector records carry
// detections; classifier/vae records carry a heatmap reference.
struct PredictionRecord {
  std::string tile_id;
  Method method = Method::Detector;
  int run_id = 0;
  double presence_score = 0.0;
  std::vector<Detection> detections;
  std::string heatmap_path;  // relative to the run directory
};

}  // namespace supbench::models
