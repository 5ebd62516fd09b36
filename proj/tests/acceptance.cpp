// Acceptance harness: runs the eleven release criteria and prints one
// PASS/FAIL line per criterion. Exits non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "supbench/acceptance/criteria.hpp"

int main() {
  using supbench::acceptance::Criterion;
  const std::vector<Criterion>& criteria = supbench::acceptance::all_criteria();

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] %2zu. %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].name.c_str(), secs, detail.empty() ? "" : " — ",
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
