#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace supbench::experiments {

// Wall-clock measurements, informational only.
struct TimingResult {
  std::string method;
  int epochs = 0;
  double train_seconds = 0.0;
  double train_seconds_per_epoch = 0.0;
  long n_eval_tiles = 0;
  double eval_seconds = 0.0;
  std::string hardware;
};

// CPU model name and logical core count from the host.
std::string hardware_descriptor();

TimingResult time_method(const std::string& method, int epochs,
                         long n_eval_tiles,
                         const std::function<void()>& train,
                         const std::function<void()>& evaluate);

void write_timing(const std::filesystem::path& path,
                  const std::vector<TimingResult>& results);

}  // namespace supbench::experiments
