#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "supbench/cam/heatmap.hpp"
#include "supbench/dataset/types.hpp"
#include "supbench/localization/mask.hpp"
#include "supbench/metrics/metrics.hpp"
#include "supbench/models/detection.hpp"

namespace supbench::experiments {

// Ground truth for one evaluated tile, rasterized once per sweep.
struct EvalTile {
  std::string tile_id;
  bool label = false;
  localization::BinaryMask gt_poly;
  localization::BinaryMask gt_box;
};

std::vector<EvalTile> build_eval_tiles(
    const std::vector<const dataset::TileRecord*>& tiles);

// One run's raw prediction material for one tile. Detector runs carry
// detections; classifier/vae runs carry a heatmap.
struct TileEval {
  std::string tile_id;
  double presence_score = 0.0;
  std::vector<models::Detection> detections;
  cam::Heatmap heatmap;
};

struct RunEval {
  std::vector<TileEval> tiles;  // aligned with the EvalTile list
};

struct SweepSpec {
  models::Method method = models::Method::Detector;
  std::vector<double> thresholds;  // ascending, within [0,1]
  int runs = 3;
};

// Detector/VAE: {0, .1, .2, .3, .35, .4, .5, .6, .7, .8, .9, .95, .999};
// classifier: {0, .05, .1, .2, ..., .9, .95, .999}.
std::vector<double> default_thresholds(models::Method method);

// Detection scored at t_detect (presence >= t), localization masks cut at
// t_localize over the true-positive-gated tiles. Sweep rows use
// t_detect == t_localize; the ablation driver splits them for the classifier.
metrics::MetricsRow evaluate_run(const RunEval& run,
                                 const std::vector<EvalTile>& gt,
                                 models::Method method, double t_detect,
                                 double t_localize);

// Mean/std over the three runs; localization cells are present only when
// every run produced a value at that threshold.
struct SweepAggregateRow {
  double threshold = 0.0;
  metrics::RunAggregate f1;
  metrics::RunAggregate precision;
  metrics::RunAggregate recall;
  std::optional<metrics::RunAggregate> dice_poly;
  std::optional<metrics::RunAggregate> iou_poly;
  std::optional<metrics::RunAggregate> dice_box;
  std::optional<metrics::RunAggregate> iou_box;
  std::optional<metrics::RunAggregate> no_overlap;
  long n_evaluated_total = 0;  // summed over runs
};

// Collapses one row per run into mean/std cells.
SweepAggregateRow aggregate_metric_rows(
    double threshold, const std::vector<metrics::MetricsRow>& per_run);

struct SweepResult {
  SweepSpec spec;
  std::vector<std::vector<metrics::MetricsRow>> per_run;  // [run][threshold]
  std::vector<SweepAggregateRow> rows;                    // [threshold]
  std::size_t best_f1_index = 0;
  std::optional<std::size_t> best_dice_index;  // by dice_poly mean
};

// Full sweep: every run evaluated at every threshold, aggregated across
// runs. Run count must equal spec.runs; ties for best go to the lower
// threshold.
SweepResult threshold_sweep(const SweepSpec& spec,
                            const std::vector<RunEval>& runs,
                            const std::vector<EvalTile>& gt);

// Per CAM method: its own sweep's best-localization row (best-F1 row when no
// threshold produced an evaluable localization set).
struct CamComparisonRow {
  std::string cam_method;
  double threshold = 0.0;
  SweepAggregateRow row;
};

std::vector<CamComparisonRow> cam_comparison(
    const SweepSpec& spec,
    const std::vector<std::pair<std::string, std::vector<RunEval>>>&
        per_method_runs,
    const std::vector<EvalTile>& gt);

// metrics.tsv emission. Per-run files carry raw rows; the aggregate file
// carries mean/std cells plus best-row markers.
void write_metrics_run(const std::filesystem::path& path,
                       const std::vector<metrics::MetricsRow>& rows);
std::vector<metrics::MetricsRow> read_metrics_run(
    const std::filesystem::path& path);
void write_metrics_aggregate(const std::filesystem::path& path,
                             const SweepResult& result);
void write_cam_comparison(const std::filesystem::path& path,
                          const std::vector<CamComparisonRow>& rows);

}  // namespace supbench::experiments
