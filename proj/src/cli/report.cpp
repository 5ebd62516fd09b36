#include "supbench/cli/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "supbench/cli/charts.hpp"
#include "supbench/core/errors.hpp"
#include "supbench/core/tsv.hpp"
#include "supbench/metrics/metrics.hpp"
#include "supbench/models/detection.hpp"

namespace supbench::cli {
namespace {

namespace fs = std::filesystem;

const std::vector<std::string>& method_order() {
  static const std::vector<std::string> m = {"detector", "classifier", "vae"};
  return m;
}

std::string method_color(const std::string& method) {
  if (method == "detector") return "#1f77b4";
  if (method == "classifier") return "#d62728";
  return "#2ca02c";
}

// "# key: value" comment lookup.
std::string comment_value(const std::vector<std::string>& comments,
                          const std::string& key) {
  const std::string prefix = "# " + key + ": ";
  for (const auto& c : comments) {
    if (c.rfind(prefix, 0) == 0) return c.substr(prefix.size());
  }
  return "";
}

// Renders a (mean, std) cell pair per the sigma-suppression rule; absent
// cells ("-") render as "-".
std::string agg_cell(const std::string& mean, const std::string& std_dev) {
  if (mean == "-") return "-";
  metrics::RunAggregate agg;
  agg.mean = tsv::parse_number(mean, "report mean cell");
  agg.std = tsv::parse_number(std_dev, "report std cell");
  agg.suppressed = agg.std < metrics::kStdSuppressionCutoff;
  return metrics::format_aggregate(agg);
}

void markdown_table(std::ostringstream& out,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
  out << "|";
  for (const auto& h : header) out << " " << h << " |";
  out << "\n|";
  for (std::size_t i = 0; i < header.size(); ++i) out << " --- |";
  out << "\n";
  for (const auto& row : rows) {
    out << "|";
    for (const auto& cell : row) out << " " << cell << " |";
    out << "\n";
  }
  out << "\n";
}

bool sweep_section(std::ostringstream& out, const fs::path& root) {
  bool any = false;
  for (const std::string& method : method_order()) {
    const fs::path path = root / "sweep" / method / "metrics.tsv";
    if (!fs::exists(path)) continue;
    const tsv::Table table = tsv::read_table(path);
    if (!any) out << "## Threshold sweeps\n\n";
    any = true;
    out << "### " << method << "\n\n";
    const std::string best_f1 = comment_value(table.comments,
                                              "best_f1_threshold");
    const std::string best_dice = comment_value(table.comments,
                                                "best_dice_threshold");
    out << "Runs: " << comment_value(table.comments, "runs")
        << ". Best detection threshold (F1): " << best_f1;
    if (!best_dice.empty()) {
      out << ". Best localization threshold (DICE, polygons): " << best_dice;
    }
    out << ".\n\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : table.rows) {
      if (r.size() != 18) {
        throw ExecutionError("malformed aggregate row in " + path.string());
      }
      rows.push_back({r[0], agg_cell(r[1], r[2]), agg_cell(r[3], r[4]),
                      agg_cell(r[5], r[6]), agg_cell(r[7], r[8]),
                      agg_cell(r[9], r[10]), agg_cell(r[11], r[12]),
                      agg_cell(r[13], r[14]), agg_cell(r[15], r[16]), r[17]});
    }
    markdown_table(out,
                   {"threshold", "F1", "precision", "recall", "DICE (poly)",
                    "IoU (poly)", "DICE (box)", "IoU (box)", "no-overlap",
                    "n"},
                   rows);
  }
  return any;
}

bool cam_section(std::ostringstream& out, const fs::path& root) {
  const fs::path path = root / "cam_compare" / "cam_comparison.tsv";
  if (!fs::exists(path)) return false;
  const tsv::Table table = tsv::read_table(path);
  out << "## CAM method comparison\n\n";
  out << "Classifier localization by CAM variant, each at its best sweep "
         "threshold.\n\n";
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : table.rows) {
    if (r.size() != 13) {
      throw ExecutionError("malformed CAM comparison row in " + path.string());
    }
    rows.push_back({r[0], r[1], agg_cell(r[2], r[3]), agg_cell(r[4], r[5]),
                    agg_cell(r[6], r[7]), agg_cell(r[8], r[9]),
                    agg_cell(r[10], r[11]), r[12]});
  }
  markdown_table(out,
                 {"CAM", "threshold", "DICE (poly)", "IoU (poly)",
                  "DICE (box)", "IoU (box)", "no-overlap", "n"},
                 rows);
  return true;
}

bool symmetry_section(std::ostringstream& out, const fs::path& root) {
  const fs::path path = root / "symmetry" / "symmetry.tsv";
  if (!fs::exists(path)) return false;
  const tsv::Table table = tsv::read_table(path);
  out << "## Symmetry analysis\n\n";
  out << "Cell (row, column): tiles the row method got wrong while the "
         "column method got right.\n\n";
  std::vector<std::string> header = {"wrong \\ right"};
  for (const auto& c : table.comments) {
    if (c.rfind("# wrong\\right\t", 0) == 0) {
      const auto cols = tsv::split(c.substr(2));
      for (std::size_t i = 1; i < cols.size(); ++i) header.push_back(cols[i]);
    }
  }
  markdown_table(out, header, table.rows);
  return true;
}

bool ablation_section(std::ostringstream& out, const fs::path& root) {
  bool any = false;
  std::vector<ChartSeries> series;
  for (const std::string& method : method_order()) {
    const fs::path path = root / "ablation" / method / "ablation.tsv";
    if (!fs::exists(path)) continue;
    const tsv::Table table = tsv::read_table(path);
    if (!any) out << "## Data ablation\n\n";
    any = true;
    out << "### " << method << "\n\n";
    std::vector<std::vector<std::string>> rows;
    ChartSeries detection;
    detection.label = method + " F1";
    detection.color = method_color(method);
    ChartSeries localization;
    localization.label = method + " DICE";
    localization.color = method_color(method);
    localization.dashed = true;
    for (const auto& r : table.rows) {
      if (r.size() != 6) {
        throw ExecutionError("malformed ablation row in " + path.string());
      }
      rows.push_back(
          {r[0], agg_cell(r[1], r[2]), agg_cell(r[3], r[4]), r[5]});
      const double fraction = tsv::parse_number(r[0], "ablation fraction");
      detection.points.emplace_back(
          fraction, tsv::parse_number(r[1], "ablation f1"));
      if (r[3] != "-") {
        localization.points.emplace_back(
            fraction, tsv::parse_number(r[3], "ablation dice"));
      }
    }
    markdown_table(out, {"fraction", "F1", "DICE (poly)", "n"}, rows);
    if (!detection.points.empty()) series.push_back(std::move(detection));
    if (!localization.points.empty()) {
      series.push_back(std::move(localization));
    }
  }
  if (any && !series.empty()) {
    write_chart_svg(root / "ablation" / "ablation_chart.svg",
                    "Performance vs training data", series);
    write_chart_png(root / "ablation" / "ablation_chart.png",
                    "Performance vs training data", series);
    out << "Detection scores are drawn as solid lines, localization scores "
           "as dashed lines.\n\n";
    out << "![ablation chart](ablation/ablation_chart.svg)\n\n";
    out << "PNG fallback: [ablation/ablation_chart.png]"
           "(ablation/ablation_chart.png)\n\n";
  }
  return any;
}

bool search_section(std::ostringstream& out, const fs::path& root) {
  bool any = false;
  for (const std::string& method : method_order()) {
    const fs::path path = root / "search" / method / "trials.tsv";
    if (!fs::exists(path)) continue;
    const tsv::Table table = tsv::read_table(path);
    if (!any) out << "## Hyperparameter search\n\n";
    any = true;
    out << "### " << method << " (" << table.rows.size() - 1
        << " trials; last row is the adopted configuration)\n\n";
    std::vector<std::vector<std::string>> rows = table.rows;
    markdown_table(out,
                   {"epochs", "batch", "optimizer", "lr", "pos. weight",
                    "recon. weight", "latent", "score"},
                   rows);
  }
  return any;
}

bool timing_section(std::ostringstream& out, const fs::path& root) {
  const fs::path path = root / "timing" / "timing.tsv";
  if (!fs::exists(path)) return false;
  const tsv::Table table = tsv::read_table(path);
  out << "## Timing\n\n";
  const std::string hardware = comment_value(table.comments, "hardware");
  if (!hardware.empty()) out << "Hardware: " << hardware << ".\n\n";
  markdown_table(out,
                 {"method", "epochs", "train (s)", "train (s/epoch)",
                  "eval tiles", "eval (s)"},
                 table.rows);
  out << "Timing numbers are informational and machine-dependent.\n\n";
  return true;
}

bool fusion_section(std::ostringstream& out, const fs::path& root) {
  const fs::path path = root / "fusion" / "fusion.tsv";
  if (!fs::exists(path)) return false;
  const tsv::Table table = tsv::read_table(path);
  out << "## Method fusion\n\n";
  markdown_table(out, {"rule", "F1", "precision", "recall"}, table.rows);
  return true;
}

void census_section(std::ostringstream& out, const fs::path& root) {
  std::vector<std::string> files;
  if (fs::exists(root)) {
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (!entry.is_regular_file()) continue;
      const std::string name = entry.path().filename().string();
      if (name.size() > 4 && name.substr(name.size() - 4) == ".tsv") {
        files.push_back(fs::relative(entry.path(), root).generic_string());
      }
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) return;
  out << "## Source files\n\n";
  out << "Every number above is copied from a cell in one of these files:\n\n";
  for (const auto& f : files) out << "- `" << f << "`\n";
  out << "\n";
}

}  // namespace

void emit_report(const fs::path& results_dir) {
  fs::create_directories(results_dir);
  std::ostringstream out;
  out << "# Supervision benchmark report\n\n";

  bool any = false;
  any |= sweep_section(out, results_dir);
  any |= cam_section(out, results_dir);
  any |= symmetry_section(out, results_dir);
  any |= ablation_section(out, results_dir);
  any |= search_section(out, results_dir);
  any |= timing_section(out, results_dir);
  any |= fusion_section(out, results_dir);
  if (!any) {
    out << "## No experiments found\n\n";
    out << "No metric files were found under `" << results_dir.string()
        << "`. Run an experiment command first.\n\n";
  }
  census_section(out, results_dir);

  std::ofstream file(results_dir / "report.md");
  if (!file) {
    throw ExecutionError("cannot write report: " +
                         (results_dir / "report.md").string());
  }
  file << out.str();
}

}  // namespace supbench::cli
