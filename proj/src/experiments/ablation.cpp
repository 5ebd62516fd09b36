#include "supbench/experiments/ablation.hpp"

#include "supbench/core/errors.hpp"
#include "supbench/core/tsv.hpp"

namespace supbench::experiments {

std::vector<double> ablation_fractions() {
  std::vector<double> fractions = {0.01, 0.05};
  for (int pct = 10; pct <= 100; pct += 10) {
    fractions.push_back(pct / 100.0);
  }
  return fractions;
}

AblationThresholds ablation_thresholds(models::Method method) {
  switch (method) {
    case models::Method::Detector:
      return {0.35, 0.35};
    case models::Method::Classifier:
      return {0.95, 0.7};
    case models::Method::Vae:
      return {0.6, 0.6};
  }
  throw ValidationError("unknown method in ablation_thresholds");
}

AblationPoint evaluate_ablation_point(models::Method method, double fraction,
                                      const std::vector<RunEval>& runs,
                                      const std::vector<EvalTile>& gt) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("ablation fraction " + tsv::format_exact(fraction) +
                          " is outside (0, 1]");
  }
  const AblationThresholds t = ablation_thresholds(method);
  std::vector<metrics::MetricsRow> per_run;
  for (const RunEval& run : runs) {
    per_run.push_back(evaluate_run(run, gt, method, t.detect, t.localize));
  }
  AblationPoint point;
  point.fraction = fraction;
  point.row = aggregate_metric_rows(t.detect, per_run);
  return point;
}

void write_ablation(const std::filesystem::path& path,
                    const std::vector<AblationPoint>& points) {
  std::vector<std::string> lines;
  lines.push_back(
      "# fraction\tf1_mean\tf1_std\tdice_poly_mean\tdice_poly_std\t"
      "n_evaluated");
  for (const AblationPoint& p : points) {
    std::string dice_mean = "-", dice_std = "-";
    if (p.row.dice_poly) {
      dice_mean = tsv::format_number(p.row.dice_poly->mean);
      dice_std = tsv::format_number(p.row.dice_poly->std);
    }
    lines.push_back(tsv::join({tsv::format_number(p.fraction),
                               tsv::format_number(p.row.f1.mean),
                               tsv::format_number(p.row.f1.std), dice_mean,
                               dice_std,
                               std::to_string(p.row.n_evaluated_total)}));
  }
  tsv::write_lines(path, lines);
}

std::vector<AblationPoint> read_ablation(const std::filesystem::path& path) {
  const tsv::Table table = tsv::read_table(path);
  std::vector<AblationPoint> points;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string ctx = path.string() + " row " + std::to_string(i + 1);
    if (row.size() != 6) {
      throw ExecutionError(ctx + ": expected 6 columns, found " +
                           std::to_string(row.size()));
    }
    AblationPoint p;
    p.fraction = tsv::parse_number(row[0], ctx);
    p.row.threshold = 0.0;
    p.row.f1.mean = tsv::parse_number(row[1], ctx);
    p.row.f1.std = tsv::parse_number(row[2], ctx);
    if (row[3] != "-") {
      metrics::RunAggregate dice;
      dice.mean = tsv::parse_number(row[3], ctx);
      dice.std = tsv::parse_number(row[4], ctx);
      p.row.dice_poly = dice;
    }
    p.row.n_evaluated_total = static_cast<long>(
        tsv::parse_number(row[5], ctx));
    points.push_back(p);
  }
  return points;
}

}  // namespace supbench::experiments
