#include "supbench/experiments/timing.hpp"

#include <chrono>
#include <fstream>
#include <thread>

#include "supbench/core/errors.hpp"
#include "supbench/core/tsv.hpp"

namespace supbench::experiments {

std::string hardware_descriptor() {
  std::string model = "unknown cpu";
  std::ifstream cpuinfo("/proc/cpuinfo");
  std::string line;
  while (std::getline(cpuinfo, line)) {
    const auto pos = line.find("model name");
    if (pos != std::string::npos) {
      const auto colon = line.find(':');
      if (colon != std::string::npos && colon + 2 <= line.size()) {
        model = line.substr(colon + 1);
        while (!model.empty() && model.front() == ' ') model.erase(0, 1);
      }
      break;
    }
  }
  return model + ", " + std::to_string(std::thread::hardware_concurrency()) +
         " logical cores";
}

TimingResult time_method(const std::string& method, int epochs,
                         long n_eval_tiles,
                         const std::function<void()>& train,
                         const std::function<void()>& evaluate) {
  if (epochs < 1) {
    throw ValidationError("timing harness requires at least one epoch");
  }
  TimingResult result;
  result.method = method;
  result.epochs = epochs;
  result.n_eval_tiles = n_eval_tiles;
  result.hardware = hardware_descriptor();

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  train();
  const auto t1 = clock::now();
  evaluate();
  const auto t2 = clock::now();

  result.train_seconds = std::chrono::duration<double>(t1 - t0).count();
  result.train_seconds_per_epoch = result.train_seconds / epochs;
  result.eval_seconds = std::chrono::duration<double>(t2 - t1).count();
  return result;
}

void write_timing(const std::filesystem::path& path,
                  const std::vector<TimingResult>& results) {
  std::vector<std::string> lines;
  if (!results.empty()) {
    lines.push_back("# hardware: " + results.front().hardware);
  }
  lines.push_back(
      "# method\tepochs\ttrain_seconds\ttrain_seconds_per_epoch\t"
      "n_eval_tiles\teval_seconds");
  for (const TimingResult& r : results) {
    lines.push_back(tsv::join(
        {r.method, std::to_string(r.epochs), tsv::format_number(r.train_seconds),
         tsv::format_number(r.train_seconds_per_epoch),
         std::to_string(r.n_eval_tiles), tsv::format_number(r.eval_seconds)}));
  }
  tsv::write_lines(path, lines);
}

}  // namespace supbench::experiments
