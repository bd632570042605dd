// src/nn/tensor.cpp

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

#include "vocalscreen/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "vocalscreen/error.hpp"

namespace vocalscreen::nn {

std::size_t shape_size(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

Tensor Tensor::slice(std::size_t first, std::size_t count) const {
  if (first + count > batch()) throw Error(Errc::InvalidArgument, "slice past the end of the batch");
  Shape s = shape;
  s[0] = count;
  Tensor out(std::move(s));
  const std::size_t per = sample_size();
  std::copy(data.begin() + static_cast<std::ptrdiff_t>(first * per),
            data.begin() + static_cast<std::ptrdiff_t>((first + count) * per), out.data.begin());
  return out;
}

void Tensor::fill(double v) { std::fill(data.begin(), data.end(), v); }

void Tensor::check_finite(const char* where) const {
  for (double v : data) {
    if (!std::isfinite(v)) throw Error(Errc::DivergedLoss, std::string("non-finite value in ") + where);
  }
}

}  // namespace vocalscreen::nn
