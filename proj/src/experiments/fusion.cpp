#include "supbench/experiments/fusion.hpp"

#include "supbench/core/errors.hpp"

namespace supbench::experiments {

FusionRule fusion_rule_from_name(const std::string& name) {
  if (name == "or") return FusionRule::Or;
  if (name == "and") return FusionRule::And;
  if (name == "majority") return FusionRule::Majority;
  throw ValidationError("unknown fusion rule '" + name +
                        "'; expected or, and, majority");
}

std::string fusion_rule_name(FusionRule rule) {
  switch (rule) {
    case FusionRule::Or:
      return "or";
    case FusionRule::And:
      return "and";
    case FusionRule::Majority:
      return "majority";
  }
  throw ValidationError("unknown fusion rule value");
}

std::vector<bool> fuse_presence(
    const std::vector<std::vector<double>>& scores_per_method,
    const std::vector<double>& thresholds, FusionRule rule) {
  if (scores_per_method.empty()) {
    throw ValidationError("fusion requires at least one method");
  }
  if (thresholds.size() != scores_per_method.size()) {
    throw ValidationError("fusion: " +
                          std::to_string(scores_per_method.size()) +
                          " methods but " + std::to_string(thresholds.size()) +
                          " thresholds");
  }
  const std::size_t n_tiles = scores_per_method.front().size();
  for (const auto& scores : scores_per_method) {
    if (scores.size() != n_tiles) {
      throw ValidationError("fusion: methods score different tile counts");
    }
  }

  const std::size_t n_methods = scores_per_method.size();
  std::vector<bool> fused(n_tiles, false);
  for (std::size_t i = 0; i < n_tiles; ++i) {
    std::size_t votes = 0;
    for (std::size_t m = 0; m < n_methods; ++m) {
      if (scores_per_method[m][i] >= thresholds[m]) ++votes;
    }
    switch (rule) {
      case FusionRule::Or:
        fused[i] = votes > 0;
        break;
      case FusionRule::And:
        fused[i] = votes == n_methods;
        break;
      case FusionRule::Majority:
        fused[i] = 2 * votes > n_methods;
        break;
    }
  }
  return fused;
}

}  // namespace supbench::experiments
