#include "supbench/experiments/sweep.hpp"

#include <algorithm>
#include <cmath>

#include "supbench/core/errors.hpp"
#include "supbench/core/tsv.hpp"
#include "supbench/dataset/tiling.hpp"

namespace supbench::experiments {

namespace {

localization::BinaryMask to_binary(const geom::GridMask& grid,
                                   const std::string& tile_id) {
  localization::BinaryMask mask;
  mask.width = grid.width;
  mask.height = grid.height;
  mask.values = grid.values;
  mask.tile_id = tile_id;
  return mask;
}

void validate_spec(const SweepSpec& spec) {
  if (spec.thresholds.empty()) {
    throw ValidationError("sweep requires at least one threshold");
  }
  for (std::size_t i = 0; i < spec.thresholds.size(); ++i) {
    const double t = spec.thresholds[i];
    if (!(t >= 0.0 && t <= 1.0)) {
      throw ValidationError("sweep threshold " + tsv::format_exact(t) +
                            " is outside [0, 1]");
    }
    if (i > 0 && spec.thresholds[i - 1] >= t) {
      throw ValidationError("sweep thresholds must be strictly ascending");
    }
  }
  if (spec.runs < 1) {
    throw ValidationError("sweep requires at least one run");
  }
}

void validate_runs(const SweepSpec& spec, const std::vector<RunEval>& runs,
                   const std::vector<EvalTile>& gt) {
  if (static_cast<int>(runs.size()) != spec.runs) {
    throw ValidationError("sweep expects " + std::to_string(spec.runs) +
                          " runs, found " + std::to_string(runs.size()));
  }
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (runs[r].tiles.size() != gt.size()) {
      throw ValidationError("run " + std::to_string(r) + " evaluates " +
                            std::to_string(runs[r].tiles.size()) +
                            " tiles but ground truth has " +
                            std::to_string(gt.size()));
    }
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (runs[r].tiles[i].tile_id != gt[i].tile_id) {
        throw ValidationError("run " + std::to_string(r) + " tile order " +
                              "diverges from ground truth at '" +
                              runs[r].tiles[i].tile_id + "'");
      }
    }
  }
}

// Aggregate one column across runs; absent if any run lacks a value.
std::optional<metrics::RunAggregate> aggregate_optional(
    const std::vector<std::optional<double>>& values) {
  std::vector<double> present;
  for (const auto& v : values) {
    if (!v) return std::nullopt;
    present.push_back(*v);
  }
  return metrics::aggregate_runs(present);
}

std::string cell(const metrics::RunAggregate& agg) {
  return tsv::format_number(agg.mean) + '\t' + tsv::format_number(agg.std);
}

std::string cell(const std::optional<metrics::RunAggregate>& agg) {
  if (!agg) return "-\t-";
  return cell(*agg);
}

}  // namespace

std::vector<EvalTile> build_eval_tiles(
    const std::vector<const dataset::TileRecord*>& tiles) {
  std::vector<EvalTile> out;
  out.reserve(tiles.size());
  for (const auto* tile : tiles) {
    EvalTile e;
    e.tile_id = tile->tile_id;
    e.label = tile->presence;
    e.gt_poly = to_binary(
        dataset::rasterize_ground_truth(*tile,
                                        dataset::GroundTruthMode::Polygons),
        tile->tile_id);
    e.gt_box = to_binary(
        dataset::rasterize_ground_truth(*tile, dataset::GroundTruthMode::Boxes),
        tile->tile_id);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<double> default_thresholds(models::Method method) {
  if (method == models::Method::Classifier) {
    return {0.0, 0.05, 0.1, 0.2, 0.3, 0.4,  0.5,
            0.6, 0.7,  0.8, 0.9, 0.95, 0.999};
  }
  return {0.0, 0.1, 0.2, 0.3, 0.35, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95,
          0.999};
}

metrics::MetricsRow evaluate_run(const RunEval& run,
                                 const std::vector<EvalTile>& gt,
                                 models::Method method, double t_detect,
                                 double t_localize) {
  if (run.tiles.size() != gt.size()) {
    throw ValidationError("evaluate_run: prediction/ground-truth size "
                          "mismatch");
  }
  std::vector<double> scores(run.tiles.size());
  std::vector<bool> labels(run.tiles.size());
  for (std::size_t i = 0; i < run.tiles.size(); ++i) {
    scores[i] = run.tiles[i].presence_score;
    labels[i] = gt[i].label;
  }

  metrics::MetricsRow row;
  row.threshold = t_detect;
  const metrics::F1Result f1 = metrics::presence_f1(scores, labels, t_detect);
  row.f1 = f1.f1;
  row.precision = f1.precision;
  row.recall = f1.recall;

  const std::vector<std::size_t> gated =
      metrics::tp_gate(scores, labels, t_detect);
  row.n_evaluated = static_cast<long>(gated.size());
  if (gated.empty()) return row;

  std::vector<double> dice_poly, iou_poly, dice_box, iou_box;
  for (std::size_t idx : gated) {
    const EvalTile& tile = gt[idx];
    localization::BinaryMask pred;
    if (method == models::Method::Detector) {
      pred = localization::detections_to_mask(run.tiles[idx].detections,
                                              t_localize, tile.gt_poly.width,
                                              tile.gt_poly.height,
                                              tile.tile_id);
    } else {
      pred = localization::threshold_heatmap(run.tiles[idx].heatmap,
                                             t_localize);
    }
    const metrics::OverlapResult poly =
        metrics::overlap_scores(pred, tile.gt_poly);
    const metrics::OverlapResult box =
        metrics::overlap_scores(pred, tile.gt_box);
    dice_poly.push_back(poly.dice);
    iou_poly.push_back(poly.iou);
    dice_box.push_back(box.dice);
    iou_box.push_back(box.iou);
  }
  const auto mean = [](const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
  };
  row.dice_poly = mean(dice_poly);
  row.iou_poly = mean(iou_poly);
  row.dice_box = mean(dice_box);
  row.iou_box = mean(iou_box);
  row.no_overlap_rate = metrics::no_overlap_rate(dice_poly);
  return row;
}

SweepAggregateRow aggregate_metric_rows(
    double threshold, const std::vector<metrics::MetricsRow>& per_run) {
  SweepAggregateRow row;
  row.threshold = threshold;
  std::vector<double> f1s, precisions, recalls;
  std::vector<std::optional<double>> dice_poly, iou_poly, dice_box, iou_box,
      no_overlap;
  for (const metrics::MetricsRow& m : per_run) {
    f1s.push_back(m.f1);
    precisions.push_back(m.precision);
    recalls.push_back(m.recall);
    dice_poly.push_back(m.dice_poly);
    iou_poly.push_back(m.iou_poly);
    dice_box.push_back(m.dice_box);
    iou_box.push_back(m.iou_box);
    no_overlap.push_back(m.no_overlap_rate);
    row.n_evaluated_total += m.n_evaluated;
  }
  row.f1 = metrics::aggregate_runs(f1s);
  row.precision = metrics::aggregate_runs(precisions);
  row.recall = metrics::aggregate_runs(recalls);
  row.dice_poly = aggregate_optional(dice_poly);
  row.iou_poly = aggregate_optional(iou_poly);
  row.dice_box = aggregate_optional(dice_box);
  row.iou_box = aggregate_optional(iou_box);
  row.no_overlap = aggregate_optional(no_overlap);
  return row;
}

SweepResult threshold_sweep(const SweepSpec& spec,
                            const std::vector<RunEval>& runs,
                            const std::vector<EvalTile>& gt) {
  validate_spec(spec);
  validate_runs(spec, runs, gt);

  SweepResult result;
  result.spec = spec;
  result.per_run.resize(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (double t : spec.thresholds) {
      result.per_run[r].push_back(evaluate_run(runs[r], gt, spec.method, t, t));
    }
  }

  for (std::size_t ti = 0; ti < spec.thresholds.size(); ++ti) {
    std::vector<metrics::MetricsRow> column;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      column.push_back(result.per_run[r][ti]);
    }
    result.rows.push_back(aggregate_metric_rows(spec.thresholds[ti], column));
  }

  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    if (result.rows[i].f1.mean > result.rows[result.best_f1_index].f1.mean) {
      result.best_f1_index = i;
    }
  }
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    if (!result.rows[i].dice_poly) continue;
    if (!result.best_dice_index ||
        result.rows[i].dice_poly->mean >
            result.rows[*result.best_dice_index].dice_poly->mean) {
      result.best_dice_index = i;
    }
  }
  return result;
}

std::vector<CamComparisonRow> cam_comparison(
    const SweepSpec& spec,
    const std::vector<std::pair<std::string, std::vector<RunEval>>>&
        per_method_runs,
    const std::vector<EvalTile>& gt) {
  if (per_method_runs.empty()) {
    throw ValidationError("cam comparison requires at least one method");
  }
  std::vector<CamComparisonRow> rows;
  for (const auto& [name, runs] : per_method_runs) {
    const SweepResult sweep = threshold_sweep(spec, runs, gt);
    const std::size_t pick =
        sweep.best_dice_index ? *sweep.best_dice_index : sweep.best_f1_index;
    CamComparisonRow row;
    row.cam_method = name;
    row.threshold = sweep.rows[pick].threshold;
    row.row = sweep.rows[pick];
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_metrics_run(const std::filesystem::path& path,
                       const std::vector<metrics::MetricsRow>& rows) {
  std::vector<std::string> lines;
  lines.push_back(
      "# threshold\tf1\tprecision\trecall\tdice_poly\tiou_poly\tdice_box\t"
      "iou_box\tno_overlap\tn_evaluated");
  for (const metrics::MetricsRow& r : rows) {
    lines.push_back(tsv::join({tsv::format_number(r.threshold),
                               tsv::format_number(r.f1),
                               tsv::format_number(r.precision),
                               tsv::format_number(r.recall),
                               tsv::format_optional(r.dice_poly),
                               tsv::format_optional(r.iou_poly),
                               tsv::format_optional(r.dice_box),
                               tsv::format_optional(r.iou_box),
                               tsv::format_optional(r.no_overlap_rate),
                               std::to_string(r.n_evaluated)}));
  }
  tsv::write_lines(path, lines);
}

std::vector<metrics::MetricsRow> read_metrics_run(
    const std::filesystem::path& path) {
  const tsv::Table table = tsv::read_table(path);
  std::vector<metrics::MetricsRow> rows;
  const auto opt = [&](const std::string& s,
                       const std::string& ctx) -> std::optional<double> {
    if (s == "-") return std::nullopt;
    return tsv::parse_number(s, ctx);
  };
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string ctx = path.string() + " row " + std::to_string(i + 1);
    if (row.size() != 10) {
      throw ExecutionError(ctx + ": expected 10 columns, found " +
                           std::to_string(row.size()));
    }
    metrics::MetricsRow m;
    m.threshold = tsv::parse_number(row[0], ctx);
    m.f1 = tsv::parse_number(row[1], ctx);
    m.precision = tsv::parse_number(row[2], ctx);
    m.recall = tsv::parse_number(row[3], ctx);
    m.dice_poly = opt(row[4], ctx);
    m.iou_poly = opt(row[5], ctx);
    m.dice_box = opt(row[6], ctx);
    m.iou_box = opt(row[7], ctx);
    m.no_overlap_rate = opt(row[8], ctx);
    m.n_evaluated = static_cast<long>(tsv::parse_number(row[9], ctx));
    rows.push_back(m);
  }
  return rows;
}

void write_metrics_aggregate(const std::filesystem::path& path,
                             const SweepResult& result) {
  std::vector<std::string> lines;
  lines.push_back("# method: " + models::method_name(result.spec.method));
  lines.push_back("# runs: " + std::to_string(result.spec.runs));
  lines.push_back(
      "# best_f1_threshold: " +
      tsv::format_number(result.rows[result.best_f1_index].threshold));
  if (result.best_dice_index) {
    lines.push_back(
        "# best_dice_threshold: " +
        tsv::format_number(result.rows[*result.best_dice_index].threshold));
  }
  lines.push_back(
      "# threshold\tf1_mean\tf1_std\tprecision_mean\tprecision_std\t"
      "recall_mean\trecall_std\tdice_poly_mean\tdice_poly_std\t"
      "iou_poly_mean\tiou_poly_std\tdice_box_mean\tdice_box_std\t"
      "iou_box_mean\tiou_box_std\tno_overlap_mean\tno_overlap_std\t"
      "n_evaluated");
  for (const SweepAggregateRow& r : result.rows) {
    lines.push_back(tsv::format_number(r.threshold) + '\t' + cell(r.f1) +
                    '\t' + cell(r.precision) + '\t' + cell(r.recall) + '\t' +
                    cell(r.dice_poly) + '\t' + cell(r.iou_poly) + '\t' +
                    cell(r.dice_box) + '\t' + cell(r.iou_box) + '\t' +
                    cell(r.no_overlap) + '\t' +
                    std::to_string(r.n_evaluated_total));
  }
  tsv::write_lines(path, lines);
}

void write_cam_comparison(const std::filesystem::path& path,
                          const std::vector<CamComparisonRow>& rows) {
  std::vector<std::string> lines;
  lines.push_back(
      "# cam_method\tthreshold\tdice_poly_mean\tdice_poly_std\t"
      "iou_poly_mean\tiou_poly_std\tdice_box_mean\tdice_box_std\t"
      "iou_box_mean\tiou_box_std\tno_overlap_mean\tno_overlap_std\t"
      "n_evaluated");
  for (const CamComparisonRow& r : rows) {
    lines.push_back(r.cam_method + '\t' + tsv::format_number(r.threshold) +
                    '\t' + cell(r.row.dice_poly) + '\t' +
                    cell(r.row.iou_poly) + '\t' + cell(r.row.dice_box) + '\t' +
                    cell(r.row.iou_box) + '\t' + cell(r.row.no_overlap) +
                    '\t' + std::to_string(r.row.n_evaluated_total));
  }
  tsv::write_lines(path, lines);
}

}  // namespace supbench::experiments
