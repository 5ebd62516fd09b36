#include "supbench/experiments/search.hpp"

#include <cmath>

#include "supbench/core/errors.hpp"
#include "supbench/core/tsv.hpp"

namespace supbench::experiments {

SearchSpace table_search_space(models::Method method) {
  SearchSpace space;
  space.epochs = {1, 3, 5, 8, 10, 20};
  for (int b = 1; b <= 24; ++b) space.batch_sizes.push_back(b);
  space.optimizers = {nn::OptimizerKind::Adam, nn::OptimizerKind::AdamW,
                      nn::OptimizerKind::Adagrad, nn::OptimizerKind::RmsProp,
                      nn::OptimizerKind::Asgd};
  // Alternating 1/5 mantissas from 1e-1 down to 1e-6.
  space.learning_rates = {0.1,    0.01,    0.005,   0.001,    0.0005,
                          0.0001, 0.00005, 0.00001, 0.000005, 0.000001};
  if (method != models::Method::Vae) {
    space.positive_class_weights = {1, 5, 10, 20, 30, 50, 100};
  }
  if (method == models::Method::Vae) {
    for (int i = 0; i <= 10; ++i) {
      space.reconstruction_weights.push_back(i / 10.0);
    }
    for (int d = 32; d <= 16384; d *= 2) space.latent_dims.push_back(d);
  }
  return space;
}

namespace {

// One Table-3 coordinate: enumerate candidate values into full configs.
struct Coordinate {
  std::vector<models::TrainConfig> candidates;
};

template <typename T, typename Setter>
Coordinate make_coordinate(const models::TrainConfig& base,
                           const std::vector<T>& values, Setter&& set) {
  Coordinate coord;
  for (const T& v : values) {
    models::TrainConfig c = base;
    set(c, v);
    coord.candidates.push_back(c);
  }
  return coord;
}

bool same_config(const models::TrainConfig& a, const models::TrainConfig& b) {
  return a.epochs == b.epochs && a.batch_size == b.batch_size &&
         a.optimizer == b.optimizer && a.learning_rate == b.learning_rate &&
         a.positive_class_weight == b.positive_class_weight &&
         a.reconstruction_weight == b.reconstruction_weight &&
         a.latent_dims == b.latent_dims && a.data_fraction == b.data_fraction;
}

}  // namespace

SearchResult hyperparam_search(models::Method method, const SearchSpace& space,
                               int budget, const TrialFn& evaluate) {
  if (budget < 1) {
    throw ValidationError("hyperparameter search budget must be >= 1");
  }

  SearchResult result;
  models::TrainConfig current = models::default_train_config(method);

  int remaining = budget;
  const auto run_trial = [&](const models::TrainConfig& config) -> double {
    Trial trial;
    trial.config = config;
    trial.score = evaluate(config);
    result.trials.push_back(trial);
    --remaining;
    return trial.score;
  };

  double current_score = run_trial(current);
  result.best = current;
  result.best_score = current_score;

  const auto coordinates = [&](const models::TrainConfig& base) {
    std::vector<Coordinate> coords;
    coords.push_back(make_coordinate(base, space.epochs,
                                     [](auto& c, int v) { c.epochs = v; }));
    coords.push_back(make_coordinate(
        base, space.batch_sizes, [](auto& c, int v) { c.batch_size = v; }));
    coords.push_back(make_coordinate(
        base, space.optimizers,
        [](auto& c, nn::OptimizerKind v) { c.optimizer = v; }));
    coords.push_back(make_coordinate(
        base, space.learning_rates,
        [](auto& c, double v) { c.learning_rate = v; }));
    coords.push_back(make_coordinate(
        base, space.positive_class_weights,
        [](auto& c, double v) { c.positive_class_weight = v; }));
    coords.push_back(make_coordinate(
        base, space.reconstruction_weights,
        [](auto& c, double v) { c.reconstruction_weight = v; }));
    coords.push_back(make_coordinate(
        base, space.latent_dims, [](auto& c, int v) { c.latent_dims = v; }));
    return coords;
  };

  for (std::size_t ci = 0; ci < 7 && remaining > 0; ++ci) {
    const Coordinate coord = coordinates(current)[ci];
    models::TrainConfig coord_best = current;
    double coord_best_score = current_score;
    for (const models::TrainConfig& candidate : coord.candidates) {
      if (remaining <= 0) break;
      if (same_config(candidate, current)) continue;  // incumbent is scored
      const double score = run_trial(candidate);
      if (score > coord_best_score) {  // ties keep the earlier config
        coord_best_score = score;
        coord_best = candidate;
      }
    }
    current = coord_best;
    current_score = coord_best_score;
    if (current_score > result.best_score) {
      result.best = current;
      result.best_score = current_score;
    }
  }
  return result;
}

void write_trials(const std::filesystem::path& path,
                  const SearchResult& result) {
  std::vector<std::string> lines;
  lines.push_back(
      "# epochs\tbatch_size\toptimizer\tlearning_rate\tpositive_class_weight\t"
      "reconstruction_weight\tlatent_dims\tscore");
  const auto row = [](const models::TrainConfig& c, double score) {
    return tsv::join({std::to_string(c.epochs), std::to_string(c.batch_size),
                      nn::optimizer_name(c.optimizer),
                      tsv::format_exact(c.learning_rate),
                      tsv::format_exact(c.positive_class_weight),
                      tsv::format_exact(c.reconstruction_weight),
                      std::to_string(c.latent_dims),
                      tsv::format_number(score)});
  };
  for (const Trial& t : result.trials) {
    lines.push_back(row(t.config, t.score));
  }
  lines.push_back("# best");
  lines.push_back(row(result.best, result.best_score));
  tsv::write_lines(path, lines);
}

}  // namespace supbench::experiments
