#pragma once

#include <functional>
#include <string>
#include <vector>

namespace supbench::acceptance {

struct Criterion {
  std::string name;
  // Returns pass/fail; may append human-readable detail (measured values).
  std::function<bool(std::string& detail)> run;
};

const std::vector<Criterion>& all_criteria();

}  // namespace supbench::acceptance
