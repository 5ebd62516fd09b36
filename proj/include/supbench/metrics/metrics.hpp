#pragma once

#include <optional>
#include <string>
#include <vector>

#include "supbench/localization/mask.hpp"

namespace supbench::metrics {

struct F1Result {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct OverlapResult {
  double dice = 0.0;
  double iou = 0.0;
};

// Detection + localization scores at one threshold. Localization fields are
// absent when the true-positive-gated set is empty.
struct MetricsRow {
  double threshold = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::optional<double> dice_poly;
  std::optional<double> iou_poly;
  std::optional<double> dice_box;
  std::optional<double> iou_box;
  std::optional<double> no_overlap_rate;
  long n_evaluated = 0;
};

// Mean / sample standard deviation over the three runs; std < 0.03 is
// suppressed in reports.
struct RunAggregate {
  double mean = 0.0;
  double std = 0.0;
  bool suppressed = false;
};

inline constexpr double kStdSuppressionCutoff = 0.03;

// prediction = (score >= t); F1 = 2PR/(P+R), 0 when P+R = 0.
F1Result presence_f1(const std::vector<double>& scores,
                     const std::vector<bool>& labels, double t);

// dice = 2|P&G| / (|P|+|G|), iou = |P&G| / |P|G|; 0 when a denominator is 0.
OverlapResult overlap_scores(const localization::BinaryMask& pred,
                             const localization::BinaryMask& gt);

// Indices of tiles with presence_score >= t_detect and a positive label.
std::vector<std::size_t> tp_gate(const std::vector<double>& scores,
                                 const std::vector<bool>& labels,
                                 double t_detect);

// Fraction of evaluated tiles with dice exactly 0; absent for empty input.
std::optional<double> no_overlap_rate(const std::vector<double>& dice_values);

// Exactly three runs; throws otherwise.
RunAggregate aggregate_runs(const std::vector<double>& values);

std::string format_aggregate(const RunAggregate& agg);

}  // namespace supbench::metrics
