#include "supbench/experiments/symmetry.hpp"

#include "supbench/core/errors.hpp"
#include "supbench/core/tsv.hpp"

namespace supbench::experiments {

SymmetryMatrix symmetry_matrix(
    const std::vector<std::string>& methods,
    const std::vector<std::vector<bool>>& predictions,
    const std::vector<bool>& labels) {
  if (methods.empty()) {
    throw ValidationError("symmetry matrix requires at least one method");
  }
  if (predictions.size() != methods.size()) {
    throw ValidationError("symmetry matrix: " + std::to_string(methods.size()) +
                          " methods but " + std::to_string(predictions.size()) +
                          " prediction sets");
  }
  for (std::size_t m = 0; m < predictions.size(); ++m) {
    if (predictions[m].size() != labels.size()) {
      throw ValidationError("symmetry matrix: method '" + methods[m] +
                            "' evaluates " +
                            std::to_string(predictions[m].size()) +
                            " tiles, labels cover " +
                            std::to_string(labels.size()));
    }
  }

  const std::size_t n_methods = methods.size();
  SymmetryMatrix matrix;
  matrix.methods = methods;
  matrix.counts.assign(n_methods, std::vector<long>(n_methods, 0));
  matrix.right_totals.assign(n_methods, 0);
  matrix.wrong_totals.assign(n_methods, 0);

  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::vector<bool> right(n_methods);
    for (std::size_t m = 0; m < n_methods; ++m) {
      right[m] = predictions[m][i] == labels[i];
      if (right[m]) {
        ++matrix.right_totals[m];
      } else {
        ++matrix.wrong_totals[m];
      }
    }
    for (std::size_t a = 0; a < n_methods; ++a) {
      if (right[a]) continue;
      for (std::size_t b = 0; b < n_methods; ++b) {
        if (b != a && right[b]) ++matrix.counts[a][b];
      }
    }
  }
  return matrix;
}

void write_symmetry(const std::filesystem::path& path,
                    const SymmetryMatrix& matrix) {
  std::vector<std::string> lines;
  std::string header = "# wrong\\right";
  for (const auto& m : matrix.methods) header += '\t' + m;
  header += "\tright_total\twrong_total";
  lines.push_back(header);
  for (std::size_t a = 0; a < matrix.methods.size(); ++a) {
    std::string line = matrix.methods[a];
    for (std::size_t b = 0; b < matrix.methods.size(); ++b) {
      line += '\t' + std::to_string(matrix.counts[a][b]);
    }
    line += '\t' + std::to_string(matrix.right_totals[a]);
    line += '\t' + std::to_string(matrix.wrong_totals[a]);
    lines.push_back(line);
  }
  tsv::write_lines(path, lines);
}

}  // namespace supbench::experiments
