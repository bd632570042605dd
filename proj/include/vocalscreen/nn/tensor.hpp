// include/vocalscreen/nn/tensor.hpp

// Copyright 2026  The VocalScreen Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

namespace vocalscreen::nn {

using Shape = std::vector<std::size_t>;
/// Aligned so vectorized kernels take the same path on every run.
using Buffer = std::vector<double, Eigen::aligned_allocator<double>>;

std::size_t shape_size(const Shape& s);
std::string shape_str(const Shape& s);

/// Dense row-major array. Layers take batch-first tensors: (N, C, F, T) for
/// feature maps and (N, D) for vectors.
struct Tensor {
  Shape shape;
  Buffer data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0) : shape(std::move(s)), data(shape_size(shape), fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t batch() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t sample_size() const { return batch() ? size() / batch() : 0; }
  /// Shape without the batch dimension.
  Shape sample_shape() const { return Shape(shape.begin() + 1, shape.end()); }

  double* sample(std::size_t n) { return data.data() + n * sample_size(); }
  const double* sample(std::size_t n) const { return data.data() + n * sample_size(); }

  /// Copies samples [first, first + count) into a new tensor.
  Tensor slice(std::size_t first, std::size_t count) const;
  void fill(double v);
  /// Throws DivergedLoss when any entry is NaN or infinite.
  void check_finite(const char* where) const;
};

}  // namespace vocalscreen::nn
