// include/vocalscreen/nn/layers.hpp

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
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "vocalscreen/nn/tensor.hpp"

namespace vocalscreen::nn {

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param(std::string n, Shape s) : name(std::move(n)), value(s), grad(s) {}
};

/// Forward caches whatever backward needs, so calls must pair up as
/// forward(x) then backward(dL/dy). Backward adds into parameter gradients.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  /// Per-sample output shape for a per-sample input shape; throws
  /// ShapeMismatch when the input does not fit.
  virtual Shape output_shape(const Shape& in) const = 0;
  virtual Tensor forward(const Tensor& x) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::vector<Param*> params() { return {}; }
  /// He-normal weights, zero biases.
  virtual void init(std::mt19937_64& /*rng*/) {}
};

enum class ConvAxisDir { F, T };

/// 1D dilated convolution along one axis of (N, C, F, T), weights shared
/// across the other axis, zero "same" padding. Weight shape (Cout, Cin, k).
class ConvAxis : public Layer {
 public:
  ConvAxis(ConvAxisDir axis, std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
           std::size_t dilation);

  std::string kind() const override { return axis_ == ConvAxisDir::F ? "conv_f" : "conv_t"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&weight_, &bias_}; }
  void init(std::mt19937_64& rng) override;

  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

 private:
  ConvAxisDir axis_;
  std::size_t cin_, cout_, k_, d_;
  Param weight_, bias_;
  Tensor input_;
};

/// Same-size 2D convolution, stride 1. Weight shape (Cout, Cin, k, k).
class Conv2d : public Layer {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel);

  std::string kind() const override { return "conv2d"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&weight_, &bias_}; }
  void init(std::mt19937_64& rng) override;

  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

 private:
  std::size_t cin_, cout_, k_;
  Param weight_, bias_;
  Tensor input_;
};

/// 2x2 window, stride 2; odd trailing rows/columns are dropped.
class MaxPool2x2 : public Layer {
 public:
  std::string kind() const override { return "maxpool"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Shape in_shape_;
  std::vector<std::size_t> argmax_;
};

class ReLU : public Layer {
 public:
  std::string kind() const override { return "relu"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  std::vector<std::uint8_t> positive_;
};

/// (N, C, ...) -> (N, C) by averaging everything after the channel axis.
class GlobalAvgPool : public Layer {
 public:
  std::string kind() const override { return "gap"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Shape in_shape_;
};

/// y = W x + b on (N, in). Weight shape (out, in).
class Dense : public Layer {
 public:
  Dense(std::size_t in, std::size_t out);

  std::string kind() const override { return "dense"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&weight_, &bias_}; }
  void init(std::mt19937_64& rng) override;

  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

 private:
  std::size_t in_, out_;
  Param weight_, bias_;
  Tensor input_;
};

/// Channel gates sigmoid(W2 relu(W1 mean(x))) scale each channel
/// of (N, C, ...) or (N, C). Hidden width max(1, C / reduction).
class SqueezeExcite : public Layer {
 public:
  SqueezeExcite(std::size_t channels, std::size_t reduction = 4);

  std::string kind() const override { return "se"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&w1_, &w2_}; }
  void init(std::mt19937_64& rng) override;

  /// Gates from the last forward call, (N, C).
  const Tensor& gates() const { return gates_; }

 private:
  std::size_t c_, hidden_;
  Param w1_, w2_;
  Tensor input_, squeezed_, hidden_pre_, gates_;
};

class Sequential : public Layer {
 public:
  Sequential() = default;
  explicit Sequential(std::vector<std::unique_ptr<Layer>> layers) : layers_(std::move(layers)) {}

  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  std::size_t size() const { return layers_.size(); }
  Layer& at(std::size_t i) { return *layers_[i]; }

  std::string kind() const override { return "sequential"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override;
  void init(std::mt19937_64& rng) override;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// y = f(x) + x, or f(x) + P(x) with a projection when f changes width.
class Residual : public Layer {
 public:
  explicit Residual(std::unique_ptr<Layer> inner, std::unique_ptr<Layer> projection = nullptr);

  std::string kind() const override { return "residual"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override;
  void init(std::mt19937_64& rng) override;

  Layer& inner() { return *inner_; }

 private:
  std::unique_ptr<Layer> inner_;
  std::unique_ptr<Layer> projection_;
};

double sigmoid(double z);

}  // namespace vocalscreen::nn
