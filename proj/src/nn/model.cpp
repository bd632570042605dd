// src/nn/model.cpp

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

#include "vocalscreen/nn/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

#include "vocalscreen/error.hpp"
#include "vocalscreen/rng.hpp"

namespace vocalscreen::nn {

using nlohmann::json;

namespace {

constexpr std::pair<Mode, std::string_view> kModeNames[] = {
    {Mode::Pure1dF, "pure-1d-f"}, {Mode::Pure1dT, "pure-1d-t"}, {Mode::Mix1dF2d, "mix-1df-2d"},
    {Mode::Mix1dT2d, "mix-1dt-2d"}, {Mode::Pure2d, "pure-2d"},   {Mode::RseNet, "rsenet"},
};

bool one_of(std::size_t v, std::initializer_list<std::size_t> allowed) {
  return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
}

}  // namespace

std::string_view to_string(Mode m) {
  for (auto [mode, name] : kModeNames) {
    if (mode == m) return name;
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  std::string norm;
  for (char c : s) norm += c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (auto [mode, name] : kModeNames) {
    if (name == norm) return mode;
  }
  throw Error(Errc::InvalidSpec, "unknown model mode '" + std::string(s) + "'");
}

Shape ModelSpec::input_shape() const {
  if (mode == Mode::RseNet) return {in_f};
  return {in_channels, in_f, in_t};
}

void ModelSpec::validate() const {
  if (mode == Mode::RseNet) {
    if (in_f == 0 || rse_width == 0 || rse_blocks == 0 || se_reduction == 0) {
      throw Error(Errc::InvalidSpec, "rsenet needs positive input, width, block count and reduction");
    }
    return;
  }
  if (!one_of(n_layers, {2, 4, 6})) {
    throw Error(Errc::InvalidSpec, "n_layers must be 2, 4 or 6, got " + std::to_string(n_layers));
  }
  if (!one_of(kernel, {3, 5, 7})) {
    throw Error(Errc::InvalidSpec, "kernel must be 3, 5 or 7, got " + std::to_string(kernel));
  }
  if (dilations.size() != n_layers) {
    throw Error(Errc::InvalidSpec, std::to_string(dilations.size()) + " dilations for " +
                                       std::to_string(n_layers) + " layers");
  }
  if (std::find(dilations.begin(), dilations.end(), 0) != dilations.end()) {
    throw Error(Errc::InvalidSpec, "dilations must be positive");
  }
  if (widths.size() < n_layers || std::find(widths.begin(), widths.end(), 0) != widths.end()) {
    throw Error(Errc::InvalidSpec, "need a positive channel width per layer");
  }
  if (in_channels == 0 || in_f == 0 || in_t == 0) throw Error(Errc::InvalidSpec, "empty input shape");
}

json spec_to_json(const ModelSpec& s) {
  return {{"mode", to_string(s.mode)},
          {"n_layers", s.n_layers},
          {"kernel", s.kernel},
          {"dilations", s.dilations},
          {"widths", s.widths},
          {"in_channels", s.in_channels},
          {"in_f", s.in_f},
          {"in_t", s.in_t},
          {"rse_width", s.rse_width},
          {"rse_blocks", s.rse_blocks},
          {"se_reduction", s.se_reduction}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  try {
    if (j.contains("mode")) s.mode = parse_mode(j["mode"].get<std::string>());
    s.n_layers = j.value("n_layers", s.n_layers);
    s.kernel = j.value("kernel", s.kernel);
    if (j.contains("dilations")) {
      s.dilations = j["dilations"].get<std::vector<std::size_t>>();
    } else if (s.dilations.size() != s.n_layers) {
      s.dilations.assign(s.n_layers, 2);
    }
    s.widths = j.value("widths", s.widths);
    s.in_channels = j.value("in_channels", s.in_channels);
    s.in_f = j.value("in_f", s.in_f);
    s.in_t = j.value("in_t", s.in_t);
    s.rse_width = j.value("rse_width", s.rse_width);
    s.rse_blocks = j.value("rse_blocks", s.rse_blocks);
    s.se_reduction = j.value("se_reduction", s.se_reduction);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidSpec, std::string("malformed model spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::size_t receptive_field(std::size_t kernel, std::span<const std::size_t> dilations) {
  if (kernel % 2 == 0) throw Error(Errc::InvalidSpec, "kernel must be odd");
  if (dilations.empty()) throw Error(Errc::InvalidSpec, "no dilations");
  std::size_t rf = 1;
  for (std::size_t d : dilations) rf += d * (kernel - 1);
  return rf;
}

// ---------------------------------------------------------------------------

namespace {

void build_conv(const ModelSpec& s, Sequential& body) {
  std::size_t cin = s.in_channels;
  for (std::size_t i = 0; i < s.n_layers; ++i) {
    const std::size_t cout = s.widths[i];
    const bool odd = i % 2 == 1;
    switch (s.mode) {
      case Mode::Pure1dF:
      case Mode::Pure1dT:
        body.add(std::make_unique<ConvAxis>(s.mode == Mode::Pure1dF ? ConvAxisDir::F : ConvAxisDir::T,
                                            cin, cout, s.kernel, s.dilations[i]));
        body.add(std::make_unique<ReLU>());
        break;
      case Mode::Mix1dF2d:
      case Mode::Mix1dT2d:
        if (!odd) {
          body.add(std::make_unique<ConvAxis>(s.mode == Mode::Mix1dF2d ? ConvAxisDir::F : ConvAxisDir::T,
                                              cin, cout, s.kernel, s.dilations[i]));
          body.add(std::make_unique<ReLU>());
        } else {
          body.add(std::make_unique<Conv2d>(cin, cout, s.kernel));
          body.add(std::make_unique<ReLU>());
          body.add(std::make_unique<MaxPool2x2>());
        }
        break;
      case Mode::Pure2d:
        body.add(std::make_unique<Conv2d>(cin, cout, s.kernel));
        body.add(std::make_unique<ReLU>());
        if (odd) body.add(std::make_unique<MaxPool2x2>());
        break;
      case Mode::RseNet:
        break;
    }
    cin = cout;
  }
  body.add(std::make_unique<GlobalAvgPool>());
  body.add(std::make_unique<Dense>(cin, 1));
}

void build_rsenet(const ModelSpec& s, Sequential& body) {
  const std::size_t w = s.rse_width;
  body.add(std::make_unique<Dense>(s.in_f, w));
  body.add(std::make_unique<ReLU>());
  for (std::size_t b = 0; b < s.rse_blocks; ++b) {
    auto inner = std::make_unique<Sequential>();
    inner->add(std::make_unique<Dense>(w, w));
    inner->add(std::make_unique<ReLU>());
    inner->add(std::make_unique<Dense>(w, w));
    inner->add(std::make_unique<SqueezeExcite>(w, s.se_reduction));
    body.add(std::make_unique<Residual>(std::move(inner)));
    body.add(std::make_unique<ReLU>());
  }
  body.add(std::make_unique<Dense>(w, 1));
}

}  // namespace

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.convolutional()) {
    build_conv(spec_, body_);
  } else {
    build_rsenet(spec_, body_);
  }
  try {
    body_.output_shape(spec_.input_shape());
  } catch (const Error& e) {
    throw Error(Errc::InvalidSpec, std::string("input too small for this architecture: ") + e.what());
  }
}

void Model::init(std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, {0x1417}));
  body_.init(rng);
  zero_grad();
}

std::size_t Model::param_count() {
  std::size_t n = 0;
  for (Param* p : params()) n += p->value.size();
  return n;
}

void Model::zero_grad() {
  for (Param* p : params()) p->grad.fill(0.0);
}

std::vector<double> Model::predict(const Tensor& x, std::size_t chunk) {
  std::vector<double> out;
  out.reserve(x.batch());
  chunk = std::max<std::size_t>(chunk, 1);
  for (std::size_t first = 0; first < x.batch(); first += chunk) {
    const Tensor logits = forward(x.slice(first, std::min(chunk, x.batch() - first)));
    for (double z : logits.data) out.push_back(sigmoid(z));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {
constexpr double kClamp = 1e-7;
}

double bce_loss(std::span<const double> p, std::span<const int> y) {
  if (p.size() != y.size()) throw Error(Errc::LengthMismatch, "one label per probability required");
  if (p.empty()) throw Error(Errc::EmptyPredictions, "no probabilities to score");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kClamp, 1.0 - kClamp);
    acc -= y[i] ? std::log(q) : std::log(1.0 - q);
  }
  return acc / static_cast<double>(p.size());
}

double bce_with_logits(const Tensor& logits, std::span<const int> y, Tensor* grad) {
  std::vector<double> p(logits.data.size());
  std::transform(logits.data.begin(), logits.data.end(), p.begin(), sigmoid);
  const double loss = bce_loss(p, y);
  if (grad) {
    *grad = Tensor(logits.shape);
    const auto n = static_cast<double>(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) grad->data[i] = (p[i] - y[i]) / n;
  }
  return loss;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

namespace {

constexpr double kStep = 1e-4;

struct Entry {
  double* value;
  double grad;
};

std::vector<std::size_t> pick(std::size_t total, std::size_t max_entries, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (total > max_entries) {
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(max_entries);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

template <class LossFn>
double fd_check(const std::vector<Entry>& entries, LossFn loss) {
  double worst = 0.0;
  for (const Entry& e : entries) {
    const double saved = *e.value;
    *e.value = saved + kStep;
    const double up = loss();
    *e.value = saved - kStep;
    const double down = loss();
    *e.value = saved;
    worst = std::max(worst, relative_error(e.grad, (up - down) / (2.0 * kStep)));
  }
  return worst;
}

std::vector<Entry> param_entries(const std::vector<Param*>& params, std::size_t max_entries,
                                 std::mt19937_64& rng) {
  std::vector<Entry> all;
  for (Param* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) all.push_back({&p->value.data[i], p->grad.data[i]});
  }
  std::vector<Entry> out;
  for (std::size_t i : pick(all.size(), max_entries, rng)) out.push_back(all[i]);
  return out;
}

}  // namespace

double grad_check(Model& model, const Tensor& x, std::span<const int> y, std::size_t max_entries,
                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  model.zero_grad();
  Tensor g;
  bce_with_logits(model.forward(x), y, &g);
  model.backward(g);
  const auto entries = param_entries(model.params(), max_entries, rng);
  return fd_check(entries, [&] { return bce_with_logits(model.forward(x), y, nullptr); });
}

double layer_grad_check(Layer& layer, const Tensor& x, std::size_t max_entries, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Param* p : layer.params()) p->grad.fill(0.0);
  const Tensor out = layer.forward(x);
  Tensor probe(out.shape);
  for (double& v : probe.data) v = normal(rng);
  const Tensor dx = layer.backward(probe);

  Tensor xv = x;
  auto loss = [&] {
    const Tensor o = layer.forward(xv);
    double acc = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) acc += o.data[i] * probe.data[i];
    return acc;
  };
  std::vector<Entry> entries = param_entries(layer.params(), max_entries, rng);
  for (std::size_t i : pick(xv.size(), max_entries, rng)) entries.push_back({&xv.data[i], dx.data[i]});
  return fd_check(entries, loss);
}

}  // namespace vocalscreen::nn
