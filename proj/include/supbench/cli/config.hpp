#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "supbench/models/config.hpp"

namespace supbench::cli {

// [data] section: synthetic generation knobs.
struct DataConfig {
  int scenes = 4;
  int scene_size = 1000;
  double panel_density = 6.0;
  std::uint64_t seed = 0;
};

// [run] section: experiment orchestration knobs.
struct RunConfig {
  int runs = 3;
  int workers = 1;
  std::uint64_t seed = 0;
  int search_budget = 16;
};

// Full configuration tree. Method sections carry the published per-method
// defaults; a config file overrides individual keys.
struct AppConfig {
  models::TrainConfig detector;
  models::TrainConfig classifier;
  models::TrainConfig vae;
  DataConfig data;
  RunConfig run;

  AppConfig();

  models::TrainConfig& train_config(models::Method method);
  const models::TrainConfig& train_config(models::Method method) const;
};

// Plain-text config: `key = value` lines grouped under `[section]` headers
// with '#' comments. Sections: detector, classifier, vae, data, run. Unknown
// sections and keys are hard errors naming the nearest valid spelling; type
// mismatches name the key and the expected type. An empty file yields all
// defaults.
AppConfig parse_config_text(const std::string& text);
AppConfig parse_config(const std::filesystem::path& path);

// Writes every section and key; parse(serialize(c)) == c exactly.
std::string serialize_config(const AppConfig& config);

bool operator==(const DataConfig& a, const DataConfig& b);
bool operator==(const RunConfig& a, const RunConfig& b);
bool operator==(const AppConfig& a, const AppConfig& b);

}  // namespace supbench::cli
