// include/vocalscreen/nn/model.hpp

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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vocalscreen/nn/layers.hpp"

namespace vocalscreen::nn {

enum class Mode { Pure1dF, Pure1dT, Mix1dF2d, Mix1dT2d, Pure2d, RseNet };

/// pure-1d-f, pure-1d-t, mix-1df-2d, mix-1dt-2d, pure-2d, rsenet.
std::string_view to_string(Mode m);
/// Accepts the names above; case and '_' vs '-' are ignored. InvalidSpec otherwise.
Mode parse_mode(std::string_view s);

struct ModelSpec {
  Mode mode = Mode::Pure1dF;
  std::size_t n_layers = 4;
  std::size_t kernel = 3;
  std::vector<std::size_t> dilations{2, 2, 2, 3};
  std::vector<std::size_t> widths{16, 32, 64, 64, 64, 64};
  std::size_t in_channels = 1;
  /// Rows (frequency) and columns (time) of the input; RSENet reads a
  /// vector of length in_f.
  std::size_t in_f = 128;
  std::size_t in_t = 64;
  std::size_t rse_width = 128;
  std::size_t rse_blocks = 3;
  std::size_t se_reduction = 4;

  bool convolutional() const { return mode != Mode::RseNet; }
  /// Per-sample input shape: (C, F, T), or (F) for RSENet.
  Shape input_shape() const;
  /// Throws InvalidSpec.
  void validate() const;
};

nlohmann::json spec_to_json(const ModelSpec& s);
ModelSpec spec_from_json(const nlohmann::json& j);

/// 1 + sum of d * (k - 1). InvalidSpec for an even kernel or no dilations.
std::size_t receptive_field(std::size_t kernel, std::span<const std::size_t> dilations);

/// Maps a batch of inputs to one logit per sample, shape (N, 1).
class Model {
 public:
  explicit Model(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  Sequential& body() { return body_; }

  void init(std::uint64_t seed);
  Tensor forward(const Tensor& x) { return body_.forward(x); }
  /// dL/dlogits, shape (N, 1). Accumulates into parameter gradients.
  Tensor backward(const Tensor& grad_logits) { return body_.backward(grad_logits); }
  std::vector<Param*> params() { return body_.params(); }
  std::size_t param_count();
  void zero_grad();

  /// Sigmoid probabilities, evaluated in chunks to bound memory.
  std::vector<double> predict(const Tensor& x, std::size_t chunk = 8);

 private:
  ModelSpec spec_;
  Sequential body_;
};

/// Batch-mean binary cross-entropy with p clamped to [1e-7, 1 - 1e-7].
double bce_loss(std::span<const double> p, std::span<const int> y);

/// Batch-mean BCE of sigmoid(logits); writes dL/dlogit into `grad` when given.
double bce_with_logits(const Tensor& logits, std::span<const int> y, Tensor* grad);

/// |a - b| / max(|a|, |b|, 1e-8).
double relative_error(double a, double b);

/// Backprop vs central differences (h = 1e-4) on the BCE loss, over up to
/// `max_entries` parameter entries drawn with `seed`. Returns the max
/// relative error.
double grad_check(Model& model, const Tensor& x, std::span<const int> y, std::size_t max_entries,
                  std::uint64_t seed);

/// Same check for one layer in isolation, with loss sum(R * layer(x)) for a
/// random probe R. Covers parameters and inputs.
double layer_grad_check(Layer& layer, const Tensor& x, std::size_t max_entries, std::uint64_t seed);

}  // namespace vocalscreen::nn
