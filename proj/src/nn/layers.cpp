// src/nn/layers.cpp

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

#include "vocalscreen/nn/layers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>

#include "vocalscreen/error.hpp"

namespace vocalscreen::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<RowMat>;
using CMapR = Eigen::Map<const RowMat>;

struct Offset {
  int f = 0;
  int t = 0;
};

/// The input is zero padded so that every kernel tap becomes a fixed column
/// offset into the flattened (F, T) plane; each tap is then a single GEMM
/// over a contiguous column range. Outputs live at padded positions, and the
/// columns that fall into padding between rows are ignored.
struct Geometry {
  std::size_t nf, nt, pf, pt, fp, tp, q0, len;
  std::vector<std::size_t> taps;

  Geometry(std::size_t f, std::size_t t, const std::vector<Offset>& offsets) : nf(f), nt(t), pf(0), pt(0) {
    for (const Offset& o : offsets) {
      pf = std::max<std::size_t>(pf, static_cast<std::size_t>(std::abs(o.f)));
      pt = std::max<std::size_t>(pt, static_cast<std::size_t>(std::abs(o.t)));
    }
    fp = nf + 2 * pf;
    tp = nt + 2 * pt;
    q0 = pf * tp + pt;
    len = (nf - 1) * tp + nt;
    for (const Offset& o : offsets) {
      taps.push_back(static_cast<std::size_t>(static_cast<long>(q0) + o.f * static_cast<long>(tp) + o.t));
    }
  }

  void pad(const double* x, std::size_t channels, RowMat& xp) const {
    xp.setZero(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(fp * tp));
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t f = 0; f < nf; ++f) {
        std::memcpy(xp.data() + c * fp * tp + (f + pf) * tp + pt, x + (c * nf + f) * nt, nt * sizeof(double));
      }
    }
  }

  /// Copies valid positions of a (channels, len) matrix into (channels, F, T), adding to dst.
  void gather(const RowMat& m, std::size_t channels, double* dst, std::size_t offset_cols) const {
    const auto stride = static_cast<std::size_t>(m.cols());
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t f = 0; f < nf; ++f) {
        const double* src = m.data() + c * stride + offset_cols + f * tp;
        double* out = dst + (c * nf + f) * nt;
        for (std::size_t t = 0; t < nt; ++t) out[t] += src[t];
      }
    }
  }
};

/// Tap j of a (Cout, Cin, K) weight tensor as a (Cout, Cin) matrix.
RowMat tap_matrix(const Tensor& w, std::size_t cout, std::size_t cin, std::size_t k, std::size_t j) {
  RowMat m(static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(cin));
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t c = 0; c < cin; ++c) m(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(c)) = w.data[(o * cin + c) * k + j];
  }
  return m;
}

void he_normal(Tensor& w, std::size_t fan_in, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (double& v : w.data) v = dist(rng);
}

void expect_rank(const Shape& in, std::size_t rank, const std::string& who) {
  if (in.size() != rank) {
    throw Error(Errc::ShapeMismatch, who + " expects rank-" + std::to_string(rank) +
                                         " samples, got " + shape_str(in));
  }
}

void expect_batch(const Tensor& x, const Layer& layer) {
  if (x.shape.empty()) throw Error(Errc::ShapeMismatch, layer.kind() + " got an empty shape");
  layer.output_shape(x.sample_shape());
}

/// Shared forward/backward for convolutions given as lists of tap offsets.
Tensor conv_forward(const Tensor& x, const Param& w, const Param& b, std::size_t cin, std::size_t cout,
                    const std::vector<Offset>& offsets) {
  const Geometry g(x.shape[2], x.shape[3], offsets);
  const std::size_t k = offsets.size();
  const auto L = static_cast<Eigen::Index>(g.len);
  Tensor y({x.batch(), cout, g.nf, g.nt});
  std::vector<RowMat> taps;
  for (std::size_t j = 0; j < k; ++j) taps.push_back(tap_matrix(w.value, cout, cin, k, j));
  RowMat xp, yp;
  for (std::size_t n = 0; n < x.batch(); ++n) {
    g.pad(x.sample(n), cin, xp);
    yp.setZero(static_cast<Eigen::Index>(cout), L);
    for (std::size_t j = 0; j < k; ++j) {
      yp.noalias() += taps[j] * xp.middleCols(static_cast<Eigen::Index>(g.taps[j]), L);
    }
    double* out = y.sample(n);
    for (std::size_t o = 0; o < cout; ++o) std::fill_n(out + o * g.nf * g.nt, g.nf * g.nt, b.value.data[o]);
    g.gather(yp, cout, out, 0);
  }
  return y;
}

Tensor conv_backward(const Tensor& x, const Tensor& dy, Param& w, Param& b, std::size_t cin,
                     std::size_t cout, const std::vector<Offset>& offsets) {
  const Geometry g(x.shape[2], x.shape[3], offsets);
  if (dy.shape != Shape{x.batch(), cout, g.nf, g.nt}) {
    throw Error(Errc::ShapeMismatch, "conv gradient has shape " + shape_str(dy.shape));
  }
  const std::size_t k = offsets.size();
  const auto L = static_cast<Eigen::Index>(g.len);
  std::vector<RowMat> taps, dtaps;
  for (std::size_t j = 0; j < k; ++j) {
    taps.push_back(tap_matrix(w.value, cout, cin, k, j));
    dtaps.push_back(RowMat::Zero(static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(cin)));
  }
  Tensor dx(x.shape);
  RowMat xp, dyp, dxp;
  const std::size_t plane = g.nf * g.nt;
  for (std::size_t n = 0; n < x.batch(); ++n) {
    g.pad(x.sample(n), cin, xp);
    dyp.setZero(static_cast<Eigen::Index>(cout), L);
    const double* d = dy.sample(n);
    for (std::size_t o = 0; o < cout; ++o) {
      double acc = 0.0;
      for (std::size_t f = 0; f < g.nf; ++f) {
        const double* src = d + o * plane + f * g.nt;
        std::memcpy(dyp.data() + o * g.len + f * g.tp, src, g.nt * sizeof(double));
        for (std::size_t t = 0; t < g.nt; ++t) acc += src[t];
      }
      b.grad.data[o] += acc;
    }
    dxp.setZero(static_cast<Eigen::Index>(cin), static_cast<Eigen::Index>(g.fp * g.tp));
    for (std::size_t j = 0; j < k; ++j) {
      const auto col = static_cast<Eigen::Index>(g.taps[j]);
      dtaps[j].noalias() += dyp * xp.middleCols(col, L).transpose();
      dxp.middleCols(col, L).noalias() += taps[j].transpose() * dyp;
    }
    g.gather(dxp, cin, dx.sample(n), g.q0);
  }
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t o = 0; o < cout; ++o) {
      for (std::size_t c = 0; c < cin; ++c) {
        w.grad.data[(o * cin + c) * k + j] += dtaps[j](static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(c));
      }
    }
  }
  return dx;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------

ConvAxis::ConvAxis(ConvAxisDir axis, std::size_t in_channels, std::size_t out_channels,
                   std::size_t kernel, std::size_t dilation)
    : axis_(axis),
      cin_(in_channels),
      cout_(out_channels),
      k_(kernel),
      d_(dilation),
      weight_("weight", {out_channels, in_channels, kernel}),
      bias_("bias", {out_channels}) {
  if (kernel % 2 == 0 || dilation == 0 || in_channels == 0 || out_channels == 0) {
    throw Error(Errc::InvalidSpec, "conv_axis needs an odd kernel and positive dilation and widths");
  }
}

Shape ConvAxis::output_shape(const Shape& in) const {
  expect_rank(in, 3, kind());
  if (in[0] != cin_) {
    throw Error(Errc::ShapeMismatch, kind() + " expects " + std::to_string(cin_) + " channels, got " +
                                         shape_str(in));
  }
  return {cout_, in[1], in[2]};
}

namespace {
std::vector<Offset> axis_offsets(ConvAxisDir axis, std::size_t k, std::size_t d) {
  std::vector<Offset> out;
  const int half = static_cast<int>(k / 2);
  for (int j = 0; j < static_cast<int>(k); ++j) {
    const int o = (j - half) * static_cast<int>(d);
    out.push_back(axis == ConvAxisDir::F ? Offset{o, 0} : Offset{0, o});
  }
  return out;
}

std::vector<Offset> square_offsets(std::size_t k) {
  std::vector<Offset> out;
  const int half = static_cast<int>(k / 2);
  for (int a = 0; a < static_cast<int>(k); ++a) {
    for (int b = 0; b < static_cast<int>(k); ++b) out.push_back({a - half, b - half});
  }
  return out;
}
}  // namespace

Tensor ConvAxis::forward(const Tensor& x) {
  expect_batch(x, *this);
  input_ = x;
  return conv_forward(x, weight_, bias_, cin_, cout_, axis_offsets(axis_, k_, d_));
}

Tensor ConvAxis::backward(const Tensor& grad_out) {
  return conv_backward(input_, grad_out, weight_, bias_, cin_, cout_, axis_offsets(axis_, k_, d_));
}

void ConvAxis::init(std::mt19937_64& rng) {
  he_normal(weight_.value, cin_ * k_, rng);
  bias_.value.fill(0.0);
}

// ---------------------------------------------------------------------------

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel)
    : cin_(in_channels),
      cout_(out_channels),
      k_(kernel),
      weight_("weight", {out_channels, in_channels, kernel, kernel}),
      bias_("bias", {out_channels}) {
  if (kernel % 2 == 0 || in_channels == 0 || out_channels == 0) {
    throw Error(Errc::InvalidSpec, "conv2d needs an odd kernel and positive widths");
  }
}

Shape Conv2d::output_shape(const Shape& in) const {
  expect_rank(in, 3, kind());
  if (in[0] != cin_) {
    throw Error(Errc::ShapeMismatch, "conv2d expects " + std::to_string(cin_) + " channels, got " +
                                         shape_str(in));
  }
  return {cout_, in[1], in[2]};
}

Tensor Conv2d::forward(const Tensor& x) {
  expect_batch(x, *this);
  input_ = x;
  return conv_forward(x, weight_, bias_, cin_, cout_, square_offsets(k_));
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  return conv_backward(input_, grad_out, weight_, bias_, cin_, cout_, square_offsets(k_));
}

void Conv2d::init(std::mt19937_64& rng) {
  he_normal(weight_.value, cin_ * k_ * k_, rng);
  bias_.value.fill(0.0);
}

// ---------------------------------------------------------------------------

Shape MaxPool2x2::output_shape(const Shape& in) const {
  expect_rank(in, 3, kind());
  if (in[1] < 2 || in[2] < 2) throw Error(Errc::ShapeMismatch, "maxpool input too small: " + shape_str(in));
  return {in[0], in[1] / 2, in[2] / 2};
}

Tensor MaxPool2x2::forward(const Tensor& x) {
  expect_batch(x, *this);
  in_shape_ = x.shape;
  const std::size_t c = x.shape[1], nf = x.shape[2], nt = x.shape[3];
  const std::size_t of = nf / 2, ot = nt / 2;
  Tensor y({x.batch(), c, of, ot});
  argmax_.assign(y.size(), 0);
  std::size_t o = 0;
  for (std::size_t n = 0; n < x.batch(); ++n) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t base = (n * c + ch) * nf * nt;
      for (std::size_t i = 0; i < of; ++i) {
        for (std::size_t j = 0; j < ot; ++j, ++o) {
          std::size_t best = base + 2 * i * nt + 2 * j;
          for (std::size_t cand : {best + 1, best + nt, best + nt + 1}) {
            if (x.data[cand] > x.data[best]) best = cand;
          }
          argmax_[o] = best;
          y.data[o] = x.data[best];
        }
      }
    }
  }
  return y;
}

Tensor MaxPool2x2::backward(const Tensor& grad_out) {
  if (grad_out.size() != argmax_.size()) throw Error(Errc::ShapeMismatch, "maxpool gradient size");
  Tensor dx(in_shape_);
  for (std::size_t o = 0; o < argmax_.size(); ++o) dx.data[argmax_[o]] += grad_out.data[o];
  return dx;
}

// ---------------------------------------------------------------------------

Tensor ReLU::forward(const Tensor& x) {
  Tensor y = x;
  positive_.assign(x.size(), 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    positive_[i] = y.data[i] > 0.0;
    if (y.data[i] <= 0.0) y.data[i] = 0.0;
  }
  return y;
}

Tensor ReLU::backward(const Tensor& grad_out) {
  if (grad_out.size() != positive_.size()) throw Error(Errc::ShapeMismatch, "relu gradient size");
  Tensor dx = grad_out;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!positive_[i]) dx.data[i] = 0.0;
  }
  return dx;
}

// ---------------------------------------------------------------------------

Shape GlobalAvgPool::output_shape(const Shape& in) const {
  if (in.size() < 2) throw Error(Errc::ShapeMismatch, "gap expects (C, ...) samples, got " + shape_str(in));
  return {in[0]};
}

Tensor GlobalAvgPool::forward(const Tensor& x) {
  expect_batch(x, *this);
  in_shape_ = x.shape;
  const std::size_t c = x.shape[1];
  const std::size_t s = x.sample_size() / c;
  Tensor y({x.batch(), c});
  for (std::size_t nc = 0; nc < x.batch() * c; ++nc) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s; ++i) acc += x.data[nc * s + i];
    y.data[nc] = acc / static_cast<double>(s);
  }
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out) {
  Tensor dx(in_shape_);
  const std::size_t c = in_shape_[1];
  const std::size_t s = dx.sample_size() / c;
  if (grad_out.size() != dx.batch() * c) throw Error(Errc::ShapeMismatch, "gap gradient size");
  for (std::size_t nc = 0; nc < grad_out.size(); ++nc) {
    const double g = grad_out.data[nc] / static_cast<double>(s);
    for (std::size_t i = 0; i < s; ++i) dx.data[nc * s + i] = g;
  }
  return dx;
}

// ---------------------------------------------------------------------------

Dense::Dense(std::size_t in, std::size_t out)
    : in_(in), out_(out), weight_("weight", {out, in}), bias_("bias", {out}) {
  if (in == 0 || out == 0) throw Error(Errc::InvalidSpec, "dense layer needs positive widths");
}

Shape Dense::output_shape(const Shape& in) const {
  if (in != Shape{in_}) {
    throw Error(Errc::ShapeMismatch, "dense expects (" + std::to_string(in_) + ") samples, got " +
                                         shape_str(in));
  }
  return {out_};
}

Tensor Dense::forward(const Tensor& x) {
  expect_batch(x, *this);
  input_ = x;
  const auto n = static_cast<Eigen::Index>(x.batch());
  Tensor y({x.batch(), out_});
  const CMapR X(x.data.data(), n, static_cast<Eigen::Index>(in_));
  const CMapR W(weight_.value.data.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
  const Eigen::Map<const Eigen::RowVectorXd> B(bias_.value.data.data(), static_cast<Eigen::Index>(out_));
  MapR Y(y.data.data(), n, static_cast<Eigen::Index>(out_));
  Y.noalias() = X * W.transpose();
  Y.rowwise() += B;
  return y;
}

Tensor Dense::backward(const Tensor& grad_out) {
  const auto n = static_cast<Eigen::Index>(input_.batch());
  if (grad_out.shape != Shape{input_.batch(), out_}) throw Error(Errc::ShapeMismatch, "dense gradient shape");
  const CMapR X(input_.data.data(), n, static_cast<Eigen::Index>(in_));
  const CMapR dY(grad_out.data.data(), n, static_cast<Eigen::Index>(out_));
  const CMapR W(weight_.value.data.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
  MapR dW(weight_.grad.data.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
  Eigen::Map<Eigen::RowVectorXd> dB(bias_.grad.data.data(), static_cast<Eigen::Index>(out_));
  dW.noalias() += dY.transpose() * X;
  dB += dY.colwise().sum();
  Tensor dx(input_.shape);
  MapR dX(dx.data.data(), n, static_cast<Eigen::Index>(in_));
  dX.noalias() = dY * W;
  return dx;
}

void Dense::init(std::mt19937_64& rng) {
  he_normal(weight_.value, in_, rng);
  bias_.value.fill(0.0);
}

// ---------------------------------------------------------------------------

SqueezeExcite::SqueezeExcite(std::size_t channels, std::size_t reduction)
    : c_(channels),
      hidden_(std::max<std::size_t>(1, reduction ? channels / reduction : 0)),
      w1_("w1", {hidden_, channels}),
      w2_("w2", {channels, hidden_}) {
  if (channels == 0 || reduction == 0) throw Error(Errc::InvalidSpec, "se block needs positive width and reduction");
}

Shape SqueezeExcite::output_shape(const Shape& in) const {
  if (in.empty() || in[0] != c_) {
    throw Error(Errc::ShapeMismatch, "se expects " + std::to_string(c_) + " channels, got " + shape_str(in));
  }
  return in;
}

Tensor SqueezeExcite::forward(const Tensor& x) {
  expect_batch(x, *this);
  input_ = x;
  const std::size_t nb = x.batch();
  const std::size_t s = x.sample_size() / c_;
  squeezed_ = Tensor({nb, c_});
  for (std::size_t nc = 0; nc < nb * c_; ++nc) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s; ++i) acc += x.data[nc * s + i];
    squeezed_.data[nc] = acc / static_cast<double>(s);
  }
  const auto N = static_cast<Eigen::Index>(nb);
  const auto C = static_cast<Eigen::Index>(c_);
  const auto H = static_cast<Eigen::Index>(hidden_);
  const CMapR S(squeezed_.data.data(), N, C);
  const CMapR W1(w1_.value.data.data(), H, C);
  const CMapR W2(w2_.value.data.data(), C, H);
  hidden_pre_ = Tensor({nb, hidden_});
  MapR Hp(hidden_pre_.data.data(), N, H);
  Hp.noalias() = S * W1.transpose();
  const RowMat A = Hp.cwiseMax(0.0);
  gates_ = Tensor({nb, c_});
  MapR G(gates_.data.data(), N, C);
  G.noalias() = A * W2.transpose();
  for (double& g : gates_.data) g = sigmoid(g);

  Tensor y = x;
  for (std::size_t nc = 0; nc < nb * c_; ++nc) {
    for (std::size_t i = 0; i < s; ++i) y.data[nc * s + i] *= gates_.data[nc];
  }
  return y;
}

Tensor SqueezeExcite::backward(const Tensor& grad_out) {
  if (grad_out.shape != input_.shape) throw Error(Errc::ShapeMismatch, "se gradient shape");
  const std::size_t nb = input_.batch();
  const std::size_t s = input_.sample_size() / c_;
  const auto N = static_cast<Eigen::Index>(nb);
  const auto C = static_cast<Eigen::Index>(c_);
  const auto H = static_cast<Eigen::Index>(hidden_);

  RowMat dz(N, C);
  for (std::size_t nc = 0; nc < nb * c_; ++nc) {
    double dg = 0.0;
    for (std::size_t i = 0; i < s; ++i) dg += grad_out.data[nc * s + i] * input_.data[nc * s + i];
    const double g = gates_.data[nc];
    dz.data()[nc] = dg * g * (1.0 - g);
  }
  const CMapR S(squeezed_.data.data(), N, C);
  const CMapR Hp(hidden_pre_.data.data(), N, H);
  const CMapR W1(w1_.value.data.data(), H, C);
  const CMapR W2(w2_.value.data.data(), C, H);
  const RowMat A = Hp.cwiseMax(0.0);
  MapR(w2_.grad.data.data(), C, H).noalias() += dz.transpose() * A;
  RowMat dh = dz * W2;
  for (Eigen::Index i = 0; i < dh.size(); ++i) {
    if (!(Hp.data()[i] > 0.0)) dh.data()[i] = 0.0;
  }
  MapR(w1_.grad.data.data(), H, C).noalias() += dh.transpose() * S;
  const RowMat ds = dh * W1;

  Tensor dx(input_.shape);
  for (std::size_t nc = 0; nc < nb * c_; ++nc) {
    const double g = gates_.data[nc];
    const double spread = ds.data()[nc] / static_cast<double>(s);
    for (std::size_t i = 0; i < s; ++i) dx.data[nc * s + i] = grad_out.data[nc * s + i] * g + spread;
  }
  return dx;
}

void SqueezeExcite::init(std::mt19937_64& rng) {
  he_normal(w1_.value, c_, rng);
  he_normal(w2_.value, hidden_, rng);
}

// ---------------------------------------------------------------------------

Shape Sequential::output_shape(const Shape& in) const {
  Shape s = in;
  for (const auto& l : layers_) s = l->output_shape(s);
  return s;
}

Tensor Sequential::forward(const Tensor& x) {
  Tensor h = x;
  for (auto& l : layers_) h = l->forward(h);
  return h;
}

Tensor Sequential::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

std::vector<Param*> Sequential::params() {
  std::vector<Param*> out;
  for (auto& l : layers_) {
    for (Param* p : l->params()) out.push_back(p);
  }
  return out;
}

void Sequential::init(std::mt19937_64& rng) {
  for (auto& l : layers_) l->init(rng);
}

// ---------------------------------------------------------------------------

Residual::Residual(std::unique_ptr<Layer> inner, std::unique_ptr<Layer> projection)
    : inner_(std::move(inner)), projection_(std::move(projection)) {}

Shape Residual::output_shape(const Shape& in) const {
  const Shape f = inner_->output_shape(in);
  const Shape skip = projection_ ? projection_->output_shape(in) : in;
  if (f != skip) {
    throw Error(Errc::ShapeMismatch, "residual branch gives " + shape_str(f) + ", skip path " + shape_str(skip));
  }
  return f;
}

Tensor Residual::forward(const Tensor& x) {
  expect_batch(x, *this);
  Tensor y = inner_->forward(x);
  const Tensor skip = projection_ ? projection_->forward(x) : x;
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += skip.data[i];
  return y;
}

Tensor Residual::backward(const Tensor& grad_out) {
  Tensor dx = inner_->backward(grad_out);
  const Tensor skip = projection_ ? projection_->backward(grad_out) : grad_out;
  for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] += skip.data[i];
  return dx;
}

std::vector<Param*> Residual::params() {
  auto out = inner_->params();
  if (projection_) {
    for (Param* p : projection_->params()) out.push_back(p);
  }
  return out;
}

void Residual::init(std::mt19937_64& rng) {
  inner_->init(rng);
  if (projection_) projection_->init(rng);
}

}  // namespace vocalscreen::nn
