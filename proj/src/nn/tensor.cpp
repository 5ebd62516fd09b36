#include "supbench/nn/tensor.hpp"

#include <cmath>
#include <sstream>

#include "supbench/core/errors.hpp"

namespace supbench::nn {

std::size_t Tensor::element_count(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ValidationError("negative tensor dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor Tensor::reshaped(std::vector<int> new_shape) const {
  if (element_count(new_shape) != data.size()) {
    throw ValidationError("reshape changes element count: " + shape_str());
  }
  Tensor out;
  out.shape = std::move(new_shape);
  out.data = data;
  return out;
}

std::size_t Tensor::sample_stride() const {
  if (shape.empty()) return 0;
  std::size_t n = shape[0] > 0 ? static_cast<std::size_t>(shape[0]) : 1;
  return data.size() / n;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

Tensor zeros_like(const Tensor& t) { return Tensor(t.shape); }

bool all_finite(const Tensor& t) {
  for (double v : t.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace supbench::nn
