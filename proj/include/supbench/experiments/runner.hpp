#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace supbench::experiments {

// Output root resolution: explicit override, then SUPBENCH_RESULTS_DIR, then
// "results" under the current directory.
std::filesystem::path results_root(const std::string& cli_override = {});

// results/{experiment}/{method}/run{k}; created on demand.
std::filesystem::path run_dir(const std::filesystem::path& root,
                              const std::string& experiment,
                              const std::string& method, int run);

struct Job {
  std::string id;
  std::function<void()> work;
};

// Runs independent jobs on up to `workers` threads. Jobs are claimed in
// list order; the first failure (by list order) is rethrown after all
// started jobs finish, so outcomes do not depend on scheduling.
void run_jobs(std::vector<Job> jobs, int workers);

}  // namespace supbench::experiments
