#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "supbench/models/config.hpp"

namespace supbench::experiments {

// Published search space. Fields that do not apply to a method (latent dims
// for the detector, say) carry empty lists and are skipped by the search.
struct SearchSpace {
  std::vector<int> epochs;
  std::vector<int> batch_sizes;
  std::vector<nn::OptimizerKind> optimizers;
  std::vector<double> learning_rates;
  std::vector<double> positive_class_weights;
  std::vector<double> reconstruction_weights;
  std::vector<int> latent_dims;
};

SearchSpace table_search_space(models::Method method);

struct Trial {
  models::TrainConfig config;
  double score = 0.0;  // validation F1
};

struct SearchResult {
  models::TrainConfig best;
  double best_score = 0.0;
  std::vector<Trial> trials;
};

using TrialFn = std::function<double(const models::TrainConfig&)>;

// Coordinate-wise sweep from the method default, one Table-3 row at a time
// in table order; each candidate costs one unit of budget and the first unit
// always evaluates the default config. Ties keep the earlier-enumerated
// config. budget < 1 is an error; budget == 1 scores the default only.
SearchResult hyperparam_search(models::Method method, const SearchSpace& space,
                               int budget, const TrialFn& evaluate);

void write_trials(const std::filesystem::path& path,
                  const SearchResult& result);

}  // namespace supbench::experiments
