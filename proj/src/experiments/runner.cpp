#include "supbench/experiments/runner.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "supbench/core/errors.hpp"

namespace supbench::experiments {

std::filesystem::path results_root(const std::string& cli_override) {
  if (!cli_override.empty()) return cli_override;
  if (const char* env = std::getenv("SUPBENCH_RESULTS_DIR")) {
    if (*env != '\0') return env;
  }
  return "results";
}

std::filesystem::path run_dir(const std::filesystem::path& root,
                              const std::string& experiment,
                              const std::string& method, int run) {
  const std::filesystem::path dir =
      root / experiment / method / ("run" + std::to_string(run));
  std::filesystem::create_directories(dir);
  return dir;
}

void run_jobs(std::vector<Job> jobs, int workers) {
  if (workers < 1) {
    throw ValidationError("worker count must be >= 1");
  }
  if (jobs.empty()) return;

  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_index = jobs.size();
  std::exception_ptr failure;

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        jobs[i].work();
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };

  const int n_threads =
      std::min<int>(workers, static_cast<int>(jobs.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace supbench::experiments
