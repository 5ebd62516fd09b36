#pragma once

#include <string>
#include <vector>

namespace supbench::experiments {

enum class FusionRule { Or, And, Majority };

FusionRule fusion_rule_from_name(const std::string& name);
std::string fusion_rule_name(FusionRule rule);

// Binarizes each method's scores at its own threshold and combines per tile.
// Majority is a strict majority of the participating methods.
std::vector<bool> fuse_presence(
    const std::vector<std::vector<double>>& scores_per_method,
    const std::vector<double>& thresholds, FusionRule rule);

}  // namespace supbench::experiments
