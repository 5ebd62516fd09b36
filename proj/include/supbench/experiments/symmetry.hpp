#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace supbench::experiments {

// counts[A][B] = tiles where method A is wrong and method B is right, over a
// shared evaluated set. The diagonal is zero by construction and every
// method's right + wrong totals equal the evaluated-set size.
struct SymmetryMatrix {
  std::vector<std::string> methods;
  std::vector<std::vector<long>> counts;
  std::vector<long> right_totals;
  std::vector<long> wrong_totals;
};

SymmetryMatrix symmetry_matrix(
    const std::vector<std::string>& methods,
    const std::vector<std::vector<bool>>& predictions,
    const std::vector<bool>& labels);

void write_symmetry(const std::filesystem::path& path,
                    const SymmetryMatrix& matrix);

}  // namespace supbench::experiments
