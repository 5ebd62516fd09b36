#include <vector>

#include "supbench/cli/commands.hpp"

int main(int argc, char** argv) {
  return supbench::cli::run_command(
      std::vector<std::string>(argv + 1, argv + argc));
}
