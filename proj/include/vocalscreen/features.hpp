// include/vocalscreen/features.hpp

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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vocalscreen/preprocess.hpp"

namespace vocalscreen {

inline constexpr std::size_t kCoefficients = 64;
inline constexpr std::size_t kFftSize = 512;
inline constexpr double kLogFloor = 1e-10;

enum class FeatureKind : std::uint8_t { Mfcc = 0, Lpc = 1, Fusion = 2 };

std::string_view to_string(FeatureKind kind);
/// Accepts "mfcc", "lpc" or "fusion" (any case).
FeatureKind parse_feature_kind(std::string_view name);

/// F x T coefficient grid; row = frequency/order, column = time.
struct FeatureMatrix {
  FeatureKind kind = FeatureKind::Mfcc;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(FeatureKind k, std::size_t r, std::size_t c, double fill = 0.0)
      : kind(k), rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// ---------------------------------------------------------------------------
// Spectral front end

/// |DFT_k(frame)|^2 for k = 0..fft_size/2, one row per frame. Frames shorter
/// than fft_size are zero padded.
///
/// Parseval with this one-sided layout: bins 0 and fft_size/2 count once and
/// every other bin twice, and the weighted sum equals fft_size times the
/// frame's time-domain energy.
std::vector<double> power_spectrum(const FrameMatrix& frames, std::size_t fft_size);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct MelFilterbank {
  std::size_t n_filters = 0;
  std::size_t fft_size = 0;
  int sample_rate_hz = 0;
  /// n_filters x (fft_size/2 + 1), row-major.
  std::vector<double> weights;
  /// Exact mel-equidistant centres in Hz (not snapped to bins).
  std::vector<double> centers_hz;
  /// Bin index of each of the n_filters + 2 edge/centre points.
  std::vector<std::size_t> point_bins;

  std::size_t n_bins() const { return fft_size / 2 + 1; }
  double weight(std::size_t filter, std::size_t bin) const {
    return weights[filter * n_bins() + bin];
  }
};

/// n_filters + 2 points equidistant on the mel axis between 0 Hz and
/// Nyquist, snapped to FFT bins; filter m is the triangle over points
/// (m, m+1, m+2) with value 1 at its centre bin. Throws DegenerateBank when
/// two points land on the same bin.
MelFilterbank build_mel_filterbank(int sample_rate_hz, std::size_t fft_size, std::size_t n_filters);

/// Orthonormal DCT-II and its inverse (DCT-III).
std::vector<double> dct_ii(std::span<const double> v);
std::vector<double> idct_ii(std::span<const double> coeffs);

/// log(bank * power + 1e-10) for every frame, n_frames x n_filters.
std::vector<double> log_mel_energies(const FrameMatrix& frames, const MelFilterbank& bank);

/// All n_filters cepstral coefficients per frame; result is n_filters x frames.
FeatureMatrix mfcc(const FrameMatrix& frames, const MelFilterbank& bank);

// ---------------------------------------------------------------------------
// Linear prediction

struct LpcFrame {
  /// Predictor coefficients a_1..a_p with x(n) ~ sum a_i x(n - i).
  std::vector<double> coeffs;
  std::size_t order = 0;
  /// sqrt of the final prediction-error power.
  std::optional<double> gain;
};

/// r(k) = sum_n frame(n) frame(n + k) for k = 0..p. Throws OrderTooHigh when
/// p >= frame length.
std::vector<double> autocorrelation(std::span<const double> frame, std::size_t p);

/// Durbin recursion on r(0..p). r(0) is regularised as
/// r(0) * (1 + 1e-9) + 1e-12 before solving; |reflection| >= 1 + 1e-6 throws
/// NumericalBreakdown.
LpcFrame levinson_durbin(std::span<const double> r, std::size_t p);

/// Regularisation applied to r(0) by levinson_durbin.
double regularized_r0(double r0);

/// Column t holds a_1..a_p of frame t.
FeatureMatrix lpc_features(const FrameMatrix& frames, std::size_t p = kCoefficients);

// ---------------------------------------------------------------------------
// Matrix shaping

/// Window 3, stride 2 mean along time: 129 columns -> 64.
FeatureMatrix pool_time(const FeatureMatrix& fm);

/// Rows 0-63 from the MFCC matrix, rows 64-127 from the LPC matrix.
FeatureMatrix fuse(const FeatureMatrix& mfcc, const FeatureMatrix& lpc);

/// Mean over time of each row.
std::vector<double> f_vector(const FeatureMatrix& fm);
/// Mean over frequency of each column.
std::vector<double> t_vector(const FeatureMatrix& fm);

/// Extracts the pooled feature matrix of `kind` from one segment's samples.
/// The bank must match the config's rate and kFftSize.
FeatureMatrix extract_features(std::span<const double> segment_samples, FeatureKind kind,
                               const PreprocessConfig& cfg, const MelFilterbank& bank);

// ---------------------------------------------------------------------------
// Standardisation

struct FeatureStats {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> mean;
  std::vector<double> stddev;
};

inline constexpr double kStdFloor = 1e-8;

/// Per-position mean and population standard deviation.
FeatureStats fit_stats(std::span<const FeatureMatrix> train);
FeatureMatrix standardize(const FeatureMatrix& fm, const FeatureStats& stats);
FeatureMatrix unstandardize(const FeatureMatrix& z, const FeatureStats& stats);

}  // namespace vocalscreen
