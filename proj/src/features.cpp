// src/features.cpp

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

#include "vocalscreen/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "vocalscreen/error.hpp"

namespace vocalscreen {

namespace {

// FFTW planning is not thread-safe; execution on fresh arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  /// Writes |X_k|^2 for k = 0..n/2 into `power`.
  void power(std::span<const double> frame, std::span<double> power) {
    std::fill(in_, in_ + n_, 0.0);
    std::copy(frame.begin(), frame.end(), in_);
    fftw_execute(plan_);
    for (std::size_t k = 0; k <= n_ / 2; ++k) {
      power[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Orthonormal DCT-II basis, row k holds s(k) cos(pi (n + 1/2) k / N).
std::vector<double> dct_basis(std::size_t n) {
  std::vector<double> basis(n * n);
  const double s0 = std::sqrt(1.0 / static_cast<double>(n));
  const double sk = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      basis[k * n + i] = (k == 0 ? s0 : sk) *
                         std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) *
                                  static_cast<double>(k) / static_cast<double>(n));
    }
  }
  return basis;
}

}  // namespace

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Mfcc: return "mfcc";
    case FeatureKind::Lpc: return "lpc";
    case FeatureKind::Fusion: return "fusion";
  }
  return "unknown";
}

FeatureKind parse_feature_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "mfcc") return FeatureKind::Mfcc;
  if (lower == "lpc") return FeatureKind::Lpc;
  if (lower == "fusion") return FeatureKind::Fusion;
  throw Error(Errc::InvalidArgument, "unknown feature kind '" + std::string(name) + "'");
}

std::vector<double> power_spectrum(const FrameMatrix& frames, std::size_t fft_size) {
  if (frames.cols > fft_size) {
    throw Error(Errc::InvalidArgument, "frame longer than the FFT size");
  }
  const std::size_t bins = fft_size / 2 + 1;
  std::vector<double> out(frames.rows * bins);
  RealFft fft(fft_size);
  for (std::size_t f = 0; f < frames.rows; ++f) {
    fft.power(frames.row(f), std::span<double>(out.data() + f * bins, bins));
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank build_mel_filterbank(int sample_rate_hz, std::size_t fft_size, std::size_t n_filters) {
  if (n_filters < 1 || !is_power_of_two(fft_size) || sample_rate_hz <= 0) {
    throw Error(Errc::InvalidArgument, "filterbank needs n_filters >= 1 and a power-of-two FFT");
  }
  MelFilterbank bank;
  bank.n_filters = n_filters;
  bank.fft_size = fft_size;
  bank.sample_rate_hz = sample_rate_hz;

  const double mel_max = hz_to_mel(sample_rate_hz / 2.0);
  const double step = mel_max / static_cast<double>(n_filters + 1);
  bank.point_bins.resize(n_filters + 2);
  for (std::size_t m = 0; m < n_filters + 2; ++m) {
    const double hz = mel_to_hz(step * static_cast<double>(m));
    bank.point_bins[m] = static_cast<std::size_t>(
        std::llround(hz * static_cast<double>(fft_size) / sample_rate_hz));
    if (m >= 1 && m <= n_filters) bank.centers_hz.push_back(hz);
    if (m > 0 && bank.point_bins[m] == bank.point_bins[m - 1]) {
      throw Error(Errc::DegenerateBank,
                  "mel points " + std::to_string(m - 1) + " and " + std::to_string(m) +
                      " share FFT bin " + std::to_string(bank.point_bins[m]));
    }
  }

  const std::size_t bins = bank.n_bins();
  bank.weights.assign(n_filters * bins, 0.0);
  for (std::size_t m = 0; m < n_filters; ++m) {
    const auto lo = static_cast<double>(bank.point_bins[m]);
    const auto mid = static_cast<double>(bank.point_bins[m + 1]);
    const auto hi = static_cast<double>(bank.point_bins[m + 2]);
    for (std::size_t k = bank.point_bins[m]; k <= bank.point_bins[m + 2] && k < bins; ++k) {
      const auto kd = static_cast<double>(k);
      bank.weights[m * bins + k] = kd <= mid ? (kd - lo) / (mid - lo) : (hi - kd) / (hi - mid);
    }
  }
  return bank;
}

std::vector<double> dct_ii(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n == 0) throw Error(Errc::InvalidArgument, "DCT of an empty vector");
  const auto basis = dct_basis(n);
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += basis[k * n + i] * v[i];
    out[k] = acc;
  }
  return out;
}

std::vector<double> idct_ii(std::span<const double> coeffs) {
  const std::size_t n = coeffs.size();
  if (n == 0) throw Error(Errc::InvalidArgument, "inverse DCT of an empty vector");
  const auto basis = dct_basis(n);
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) out[i] += basis[k * n + i] * coeffs[k];
  }
  return out;
}

std::vector<double> log_mel_energies(const FrameMatrix& frames, const MelFilterbank& bank) {
  const std::vector<double> power = power_spectrum(frames, bank.fft_size);
  const std::size_t bins = bank.n_bins();
  std::vector<double> out(frames.rows * bank.n_filters);
  for (std::size_t f = 0; f < frames.rows; ++f) {
    const double* spec = power.data() + f * bins;
    for (std::size_t m = 0; m < bank.n_filters; ++m) {
      double e = 0.0;
      for (std::size_t k = bank.point_bins[m]; k <= bank.point_bins[m + 2] && k < bins; ++k) {
        e += bank.weights[m * bins + k] * spec[k];
      }
      out[f * bank.n_filters + m] = std::log(e + kLogFloor);
    }
  }
  return out;
}

FeatureMatrix mfcc(const FrameMatrix& frames, const MelFilterbank& bank) {
  const std::vector<double> log_e = log_mel_energies(frames, bank);
  const std::size_t n = bank.n_filters;
  const auto basis = dct_basis(n);
  FeatureMatrix out(FeatureKind::Mfcc, n, frames.rows);
  for (std::size_t f = 0; f < frames.rows; ++f) {
    const double* v = log_e.data() + f * n;
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += basis[k * n + i] * v[i];
      out.at(k, f) = acc;
    }
  }
  return out;
}

std::vector<double> autocorrelation(std::span<const double> frame, std::size_t p) {
  if (p >= frame.size()) {
    throw Error(Errc::OrderTooHigh, "LPC order " + std::to_string(p) +
                                        " needs a frame longer than " + std::to_string(frame.size()));
  }
  std::vector<double> r(p + 1, 0.0);
  for (std::size_t k = 0; k <= p; ++k) {
    double acc = 0.0;
    for (std::size_t n = 0; n + k < frame.size(); ++n) acc += frame[n] * frame[n + k];
    r[k] = acc;
  }
  return r;
}

double regularized_r0(double r0) { return r0 * (1.0 + 1e-9) + 1e-12; }

LpcFrame levinson_durbin(std::span<const double> r, std::size_t p) {
  if (r.size() < p + 1) {
    throw Error(Errc::InvalidArgument, "autocorrelation shorter than order + 1");
  }
  double err = regularized_r0(r[0]);
  if (!(err > 0.0)) {
    throw Error(Errc::NumericalBreakdown, "non-positive zero-lag autocorrelation");
  }
  std::vector<double> a(p + 1, 0.0);
  std::vector<double> prev(p + 1, 0.0);
  for (std::size_t i = 1; i <= p; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc -= a[j] * r[i - j];
    const double k = acc / err;
    if (!std::isfinite(k) || std::abs(k) >= 1.0 + 1e-6) {
      throw Error(Errc::NumericalBreakdown,
                  "reflection coefficient " + std::to_string(k) + " at order " + std::to_string(i));
    }
    prev = a;
    a[i] = k;
    for (std::size_t j = 1; j < i; ++j) a[j] = prev[j] - k * prev[i - j];
    err *= (1.0 - k * k);
    if (!(err > 0.0)) {
      throw Error(Errc::NumericalBreakdown, "prediction error collapsed at order " + std::to_string(i));
    }
  }
  LpcFrame out;
  out.order = p;
  out.coeffs.assign(a.begin() + 1, a.end());
  out.gain = std::sqrt(err);
  return out;
}

FeatureMatrix lpc_features(const FrameMatrix& frames, std::size_t p) {
  if (frames.cols <= p) {
    throw Error(Errc::OrderTooHigh, "frame length must exceed the LPC order");
  }
  FeatureMatrix out(FeatureKind::Lpc, p, frames.rows);
  for (std::size_t f = 0; f < frames.rows; ++f) {
    const LpcFrame lpc = levinson_durbin(autocorrelation(frames.row(f), p), p);
    for (std::size_t i = 0; i < p; ++i) out.at(i, f) = lpc.coeffs[i];
  }
  return out;
}

FeatureMatrix pool_time(const FeatureMatrix& fm) {
  if (fm.cols != 2 * kPooledColumns + 1) {
    throw Error(Errc::WrongShape, "pool_time expects 129 columns, got " + std::to_string(fm.cols));
  }
  FeatureMatrix out(fm.kind, fm.rows, kPooledColumns);
  for (std::size_t r = 0; r < fm.rows; ++r) {
    for (std::size_t j = 0; j < kPooledColumns; ++j) {
      out.at(r, j) = (fm.at(r, 2 * j) + fm.at(r, 2 * j + 1) + fm.at(r, 2 * j + 2)) / 3.0;
    }
  }
  return out;
}

FeatureMatrix fuse(const FeatureMatrix& mfcc_m, const FeatureMatrix& lpc_m) {
  if (mfcc_m.kind != FeatureKind::Mfcc || lpc_m.kind != FeatureKind::Lpc ||
      mfcc_m.rows != kCoefficients || lpc_m.rows != kCoefficients || mfcc_m.cols != lpc_m.cols) {
    throw Error(Errc::ShapeMismatch, "fuse needs a 64-row MFCC and a 64-row LPC matrix of equal width");
  }
  FeatureMatrix out(FeatureKind::Fusion, mfcc_m.rows + lpc_m.rows, mfcc_m.cols);
  std::copy(mfcc_m.data.begin(), mfcc_m.data.end(), out.data.begin());
  std::copy(lpc_m.data.begin(), lpc_m.data.end(),
            out.data.begin() + static_cast<std::ptrdiff_t>(mfcc_m.data.size()));
  return out;
}

std::vector<double> f_vector(const FeatureMatrix& fm) {
  std::vector<double> v(fm.rows, 0.0);
  for (std::size_t r = 0; r < fm.rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fm.cols; ++c) acc += fm.at(r, c);
    v[r] = acc / static_cast<double>(fm.cols);
  }
  return v;
}

std::vector<double> t_vector(const FeatureMatrix& fm) {
  std::vector<double> v(fm.cols, 0.0);
  for (std::size_t r = 0; r < fm.rows; ++r) {
    for (std::size_t c = 0; c < fm.cols; ++c) v[c] += fm.at(r, c);
  }
  for (double& x : v) x /= static_cast<double>(fm.rows);
  return v;
}

FeatureMatrix extract_features(std::span<const double> segment_samples, FeatureKind kind,
                               const PreprocessConfig& cfg, const MelFilterbank& bank) {
  const FrameMatrix frames = frame_and_window(segment_samples, cfg);
  switch (kind) {
    case FeatureKind::Mfcc: return pool_time(mfcc(frames, bank));
    case FeatureKind::Lpc: return pool_time(lpc_features(frames, kCoefficients));
    case FeatureKind::Fusion:
      return fuse(pool_time(mfcc(frames, bank)), pool_time(lpc_features(frames, kCoefficients)));
  }
  throw Error(Errc::InvalidArgument, "unknown feature kind");
}

FeatureStats fit_stats(std::span<const FeatureMatrix> train) {
  if (train.empty()) throw Error(Errc::EmptyData, "cannot fit statistics on an empty set");
  FeatureStats st;
  st.rows = train.front().rows;
  st.cols = train.front().cols;
  const std::size_t n = st.rows * st.cols;
  st.mean.assign(n, 0.0);
  st.stddev.assign(n, 0.0);
  for (const auto& fm : train) {
    if (fm.rows != st.rows || fm.cols != st.cols) {
      throw Error(Errc::ShapeMismatch, "training matrices differ in shape");
    }
    for (std::size_t i = 0; i < n; ++i) st.mean[i] += fm.data[i];
  }
  const auto count = static_cast<double>(train.size());
  for (double& m : st.mean) m /= count;
  for (const auto& fm : train) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = fm.data[i] - st.mean[i];
      st.stddev[i] += d * d;
    }
  }
  for (double& s : st.stddev) s = std::sqrt(s / count);
  return st;
}

FeatureMatrix standardize(const FeatureMatrix& fm, const FeatureStats& stats) {
  if (fm.rows != stats.rows || fm.cols != stats.cols) {
    throw Error(Errc::ShapeMismatch, "matrix shape does not match the statistics");
  }
  FeatureMatrix out = fm;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = (fm.data[i] - stats.mean[i]) / std::max(stats.stddev[i], kStdFloor);
  }
  return out;
}

FeatureMatrix unstandardize(const FeatureMatrix& z, const FeatureStats& stats) {
  if (z.rows != stats.rows || z.cols != stats.cols) {
    throw Error(Errc::ShapeMismatch, "matrix shape does not match the statistics");
  }
  FeatureMatrix out = z;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = z.data[i] * std::max(stats.stddev[i], kStdFloor) + stats.mean[i];
  }
  return out;
}

}  // namespace vocalscreen
