#pragma once

#include <filesystem>
#include <vector>

#include "supbench/experiments/sweep.hpp"
#include "supbench/models/detection.hpp"

namespace supbench::experiments {

// Training-set fractions: 1%, 5%, then 10% steps up to 100%.
std::vector<double> ablation_fractions();

// Fixed evaluation thresholds carried over from the sweep experiments:
// detector 0.35/0.35, classifier 0.95 detect + 0.7 localize, vae 0.6/0.6.
struct AblationThresholds {
  double detect = 0.0;
  double localize = 0.0;
};

AblationThresholds ablation_thresholds(models::Method method);

struct AblationPoint {
  double fraction = 0.0;
  SweepAggregateRow row;
};

// Aggregates the three runs trained at `fraction` at the method's fixed
// thresholds. Fractions that strip all positives evaluate normally and
// simply score zero; they are points on the curve, not errors.
AblationPoint evaluate_ablation_point(models::Method method, double fraction,
                                      const std::vector<RunEval>& runs,
                                      const std::vector<EvalTile>& gt);

void write_ablation(const std::filesystem::path& path,
                    const std::vector<AblationPoint>& points);
std::vector<AblationPoint> read_ablation(const std::filesystem::path& path);

}  // namespace supbench::experiments
