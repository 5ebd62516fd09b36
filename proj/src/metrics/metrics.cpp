#include "supbench/metrics/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "supbench/core/errors.hpp"
#include "supbench/core/tsv.hpp"

namespace supbench::metrics {

F1Result presence_f1(const std::vector<double>& scores,
                     const std::vector<bool>& labels, double t) {
  if (scores.size() != labels.size())
    throw ValidationError("scores and labels differ in length: " +
                          std::to_string(scores.size()) + " vs " +
                          std::to_string(labels.size()));
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= t;
    if (pred && labels[i]) ++tp;
    else if (pred && !labels[i]) ++fp;
    else if (!pred && labels[i]) ++fn;
  }
  F1Result r;
  r.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  r.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  const double pr = r.precision + r.recall;
  r.f1 = pr > 0.0 ? 2.0 * r.precision * r.recall / pr : 0.0;
  return r;
}

OverlapResult overlap_scores(const localization::BinaryMask& pred,
                             const localization::BinaryMask& gt) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw ValidationError("mask dimension mismatch in overlap_scores");
  std::size_t p = 0, g = 0, inter = 0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const bool a = pred.values[i] != 0;
    const bool b = gt.values[i] != 0;
    p += a;
    g += b;
    inter += (a && b);
  }
  OverlapResult r;
  const std::size_t uni = p + g - inter;
  r.dice = (p + g) > 0 ? 2.0 * static_cast<double>(inter) / (p + g) : 0.0;
  r.iou = uni > 0 ? static_cast<double>(inter) / uni : 0.0;
  return r;
}

std::vector<std::size_t> tp_gate(const std::vector<double>& scores,
                                 const std::vector<bool>& labels,
                                 double t_detect) {
  if (scores.size() != labels.size())
    throw ValidationError("scores and labels differ in length in tp_gate");
  std::vector<std::size_t> evaluated;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (labels[i] && scores[i] >= t_detect) evaluated.push_back(i);
  return evaluated;
}

std::optional<double> no_overlap_rate(const std::vector<double>& dice_values) {
  if (dice_values.empty()) return std::nullopt;
  std::size_t zeros = 0;
  for (double d : dice_values)
    if (d == 0.0) ++zeros;
  return static_cast<double>(zeros) / dice_values.size();
}

RunAggregate aggregate_runs(const std::vector<double>& values) {
  if (values.size() != 3)
    throw ValidationError("aggregate_runs needs exactly 3 values, got " +
                          std::to_string(values.size()));
  RunAggregate agg;
  agg.mean = (values[0] + values[1] + values[2]) / 3.0;
  double ss = 0.0;
  for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
  agg.std = std::sqrt(ss / 2.0);  // sample (n-1) standard deviation
  agg.suppressed = agg.std < kStdSuppressionCutoff;
  return agg;
}

namespace {

std::string two_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

// Report rendering: mean at two decimals, "(±σ)" appended only when the
// deviation clears the suppression cutoff.
std::string format_aggregate(const RunAggregate& agg) {
  if (agg.suppressed) return two_decimals(agg.mean);
  return two_decimals(agg.mean) + " (\xC2\xB1" + two_decimals(agg.std) + ")";
}

}  // namespace supbench::metrics
