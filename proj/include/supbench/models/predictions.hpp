#pragma once

#include <filesystem>
#include <vector>

#include "supbench/models/detection.hpp"

namespace supbench::models {

// predictions.tsv: tile_id, method, run_id, presence_score, detections,
// heatmap. Detections serialize as "x1,y1,x2,y2,score" groups joined by ';';
// empty detection lists and absent heatmap paths serialize as "-". Numbers are
// written round-trippable so read(write(records)) == records exactly.
void write_predictions(const std::filesystem::path& path,
                       const std::vector<PredictionRecord>& records);

std::vector<PredictionRecord> read_predictions(
    const std::filesystem::path& path);

}  // namespace supbench::models
