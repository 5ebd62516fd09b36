#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace supbench::nn {

// Dense row-major tensor of doubles. Shapes are (N,C,H,W) for feature maps
// and (N,D) for flat activations; helpers below assume those layouts.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(element_count(shape), 0.0);
  }

  static std::size_t element_count(const std::vector<int>& shape);

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  int dim(std::size_t i) const { return shape[i]; }
  int rank() const { return static_cast<int>(shape.size()); }

  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }

  // Flat view reshape; element count must match.
  Tensor reshaped(std::vector<int> new_shape) const;

  // Offset of sample n in a batched tensor (N, ...rest...).
  std::size_t sample_stride() const;

  std::string shape_str() const;
};

Tensor zeros_like(const Tensor& t);

bool all_finite(const Tensor& t);

}  // namespace supbench::nn
