// tests/features_test.cpp

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

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "test_util.hpp"
#include "vocalscreen/features.hpp"

using namespace vocalscreen;

namespace {

FrameMatrix single_frame(std::vector<double> values) {
  FrameMatrix fm;
  fm.rows = 1;
  fm.cols = values.size();
  fm.values = std::move(values);
  return fm;
}

std::vector<double> tone_segment(double hz, double amp = 0.5) {
  std::vector<double> x(48000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / 16000.0);
  }
  return x;
}

std::vector<double> noise_segment(unsigned seed, double sd = 0.1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  std::vector<double> x(48000);
  for (double& v : x) v = g(rng);
  return x;
}

FeatureMatrix random_matrix(FeatureKind kind, std::size_t rows, std::size_t cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 2.0);
  FeatureMatrix fm(kind, rows, cols);
  for (double& v : fm.data) v = g(rng);
  return fm;
}

/// Autocorrelation of a random AR(1)-coloured signal: positive definite.
std::vector<double> random_stable_r(std::mt19937_64& rng, std::size_t p) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> pole(-0.6, 0.6);
  const double a = pole(rng);
  std::vector<double> x(1024);
  double prev = 0.0;
  for (double& v : x) {
    prev = a * prev + g(rng);
    v = prev;
  }
  return autocorrelation(x, p);
}

/// Dense solve of the Toeplitz normal equations on the regularised r.
std::vector<double> dense_lpc(const std::vector<double>& r, std::size_t p) {
  Eigen::MatrixXd R(p, p);
  Eigen::VectorXd rhs(p);
  for (std::size_t i = 0; i < p; ++i) {
    rhs(static_cast<Eigen::Index>(i)) = r[i + 1];
    for (std::size_t j = 0; j < p; ++j) {
      const std::size_t lag = i > j ? i - j : j - i;
      R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          lag == 0 ? regularized_r0(r[0]) : r[lag];
    }
  }
  const Eigen::VectorXd sol = R.fullPivLu().solve(rhs);
  return {sol.data(), sol.data() + sol.size()};
}

}  // namespace

TEST(PowerSpectrum, ZeroFrameGivesZeroRow) {
  const auto p = power_spectrum(single_frame(std::vector<double>(512, 0.0)), 512);
  ASSERT_EQ(p.size(), 257u);
  for (double v : p) EXPECT_EQ(v, 0.0);
}

TEST(PowerSpectrum, PureToneConcentratesInOneBin) {
  for (std::size_t k0 : {1u, 17u, 100u, 255u}) {
    std::vector<double> x(512);
    for (std::size_t n = 0; n < 512; ++n) {
      x[n] = std::cos(2.0 * std::numbers::pi * static_cast<double>(k0 * n) / 512.0);
    }
    const auto p = power_spectrum(single_frame(x), 512);
    // Analytic: |X_k0| = N/2.
    EXPECT_NEAR(p[k0], 256.0 * 256.0, 1e-6);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k != k0) {
        EXPECT_LT(p[k], 1e-9 * p[k0]) << "bin " << k;
      }
    }
  }
}

TEST(PowerSpectrum, ParsevalWithOneSidedWeights) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t len : {512u, 300u}) {
    std::vector<double> x(len);
    double energy = 0.0;
    for (double& v : x) {
      v = g(rng);
      energy += v * v;
    }
    const auto p = power_spectrum(single_frame(x), 512);
    double sum = p[0] + p[256];
    for (std::size_t k = 1; k < 256; ++k) sum += 2.0 * p[k];
    EXPECT_NEAR(sum, 512.0 * energy, 1e-8 * sum);
  }
}

TEST(PowerSpectrum, RejectsFrameLongerThanFft) {
  testutil::expect_errc(Errc::InvalidArgument,
                        [] { power_spectrum(single_frame(std::vector<double>(600, 0.0)), 512); });
}

TEST(Mel, ScaleValues) {
  EXPECT_EQ(hz_to_mel(0.0), 0.0);
  EXPECT_NEAR(hz_to_mel(700.0), 781.17, 0.01);
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-12);
  EXPECT_NEAR(hz_to_mel(8000.0), 2840.0, 0.05);
  for (double hz : {10.0, 440.0, 3999.0}) EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
}

TEST(MelFilterbank, ShapeAndSpacing) {
  const auto bank = build_mel_filterbank(16000, 512, 64);
  EXPECT_EQ(bank.weights.size(), 64u * 257u);
  ASSERT_EQ(bank.centers_hz.size(), 64u);
  const double step = hz_to_mel(bank.centers_hz[1]) - hz_to_mel(bank.centers_hz[0]);
  for (std::size_t m = 1; m < 64; ++m) {
    const double d = hz_to_mel(bank.centers_hz[m]) - hz_to_mel(bank.centers_hz[m - 1]);
    EXPECT_NEAR(d, step, 1e-6 * step);
  }
  EXPECT_NEAR(step, hz_to_mel(8000.0) / 65.0, 1e-9);
}

TEST(MelFilterbank, TrianglesArePeakNormalised) {
  const auto bank = build_mel_filterbank(16000, 512, 64);
  for (std::size_t m = 0; m < 64; ++m) {
    double peak = 0.0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < 257; ++k) {
      const double w = bank.weight(m, k);
      ASSERT_GE(w, 0.0);
      if (w > 0.0) {
        EXPECT_GT(k, bank.point_bins[m]);
        EXPECT_LT(k, bank.point_bins[m + 2]);
      }
      if (w > peak) {
        peak = w;
        arg = k;
      }
    }
    EXPECT_EQ(peak, 1.0);
    EXPECT_EQ(arg, bank.point_bins[m + 1]);
  }
  // Filter 0 rises from point 0 and falls to point 2.
  EXPECT_EQ(bank.point_bins[0], 0u);
  EXPECT_EQ(bank.weight(0, bank.point_bins[1]), 1.0);
}

TEST(MelFilterbank, CoversEveryBinBetweenFirstAndLastCentre) {
  for (auto [sr, fft, n] : {std::tuple{16000, 512u, 64u}, std::tuple{16000, 1024u, 40u},
                            std::tuple{8000, 512u, 26u}}) {
    const auto bank = build_mel_filterbank(sr, fft, n);
    for (std::size_t k = bank.point_bins[1]; k <= bank.point_bins[n]; ++k) {
      double col = 0.0;
      for (std::size_t m = 0; m < n; ++m) col += bank.weight(m, k);
      EXPECT_GT(col, 0.0) << "bin " << k;
    }
  }
}

TEST(MelFilterbank, DegenerateWhenCentresCollide) {
  testutil::expect_errc(Errc::DegenerateBank, [] { build_mel_filterbank(16000, 64, 64); });
  testutil::expect_errc(Errc::InvalidArgument, [] { build_mel_filterbank(16000, 500, 64); });
}

TEST(Dct, ConstantVectorHasOnlyDc) {
  const std::vector<double> c(64, 2.5);
  const auto X = dct_ii(c);
  EXPECT_NEAR(X[0], 2.5 * std::sqrt(64.0), 1e-12);
  for (std::size_t k = 1; k < 64; ++k) EXPECT_NEAR(X[k], 0.0, 1e-12);
}

TEST(Dct, InverseReproducesInput) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 3.0);
  for (std::size_t n : {1u, 4u, 13u, 64u}) {
    std::vector<double> v(n);
    for (double& x : v) x = g(rng);
    const auto back = idct_ii(dct_ii(v));
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(back[i], v[i], 1e-10);
  }
}

TEST(Dct, ImpulseMatchesDirectFormula) {
  const std::vector<double> impulse{1.0, 0.0, 0.0, 0.0};
  const auto X = dct_ii(impulse);
  for (std::size_t k = 0; k < 4; ++k) {
    const double s = k == 0 ? std::sqrt(0.25) : std::sqrt(0.5);
    EXPECT_NEAR(X[k], s * std::cos(std::numbers::pi * static_cast<double>(k) / 8.0), 1e-15);
  }
}

TEST(Mfcc, IdenticalFramesGiveIdenticalColumns) {
  PreprocessConfig cfg;
  const auto bank = build_mel_filterbank(16000, 512, 64);
  std::vector<double> x(48000);
  // Period divides the hop, so every frame sees the same samples.
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i % 371 == 0) ? 0.5 : 0.0;
  const FeatureMatrix m = mfcc(frame_and_window(x, cfg), bank);
  ASSERT_EQ(m.rows, 64u);
  ASSERT_EQ(m.cols, 129u);
  for (std::size_t r = 0; r < 64; ++r) EXPECT_EQ(m.at(r, 0), m.at(r, 77));
}

TEST(Mfcc, ToneEnergyPeaksAtNearestFilter) {
  PreprocessConfig cfg;
  const auto bank = build_mel_filterbank(16000, 512, 64);
  const auto log_e = log_mel_energies(frame_and_window(tone_segment(1000.0), cfg), bank);
  std::size_t nearest = 0;
  for (std::size_t m = 1; m < 64; ++m) {
    if (std::abs(bank.centers_hz[m] - 1000.0) < std::abs(bank.centers_hz[nearest] - 1000.0)) nearest = m;
  }
  for (std::size_t f = 0; f < 129; f += 16) {
    const double* row = log_e.data() + f * 64;
    EXPECT_EQ(static_cast<std::size_t>(std::max_element(row, row + 64) - row), nearest);
  }
}

TEST(Mfcc, ToneHasMoreHigherOrderEnergyThanNoise) {
  PreprocessConfig cfg;
  const auto bank = build_mel_filterbank(16000, 512, 64);
  auto high_energy = [&](const std::vector<double>& x) {
    const FeatureMatrix m = mfcc(frame_and_window(x, cfg), bank);
    double e = 0.0;
    for (std::size_t r = 1; r < 64; ++r) {
      for (std::size_t c = 0; c < m.cols; ++c) e += m.at(r, c) * m.at(r, c);
    }
    return e;
  };
  EXPECT_GT(high_energy(tone_segment(1000.0)), high_energy(noise_segment(4)));
}

TEST(Mfcc, AmplitudeScalingOnlyMovesC0) {
  PreprocessConfig cfg;
  const auto bank = build_mel_filterbank(16000, 512, 64);
  const auto x = noise_segment(8);
  auto y = x;
  for (double& v : y) v *= 3.0;
  const FeatureMatrix a = mfcc(frame_and_window(x, cfg), bank);
  const FeatureMatrix b = mfcc(frame_and_window(y, cfg), bank);
  for (std::size_t c = 0; c < a.cols; ++c) {
    EXPECT_NEAR(b.at(0, c) - a.at(0, c), 2.0 * std::log(3.0) * std::sqrt(64.0), 1e-6);
    for (std::size_t r = 1; r < 64; ++r) ASSERT_NEAR(a.at(r, c), b.at(r, c), 1e-6);
  }
}

TEST(Autocorrelation, BasicProperties) {
  EXPECT_EQ(autocorrelation(std::vector<double>(32, 0.0), 8), std::vector<double>(9, 0.0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(100);
  double energy = 0.0;
  for (double& v : x) {
    v = g(rng);
    energy += v * v;
  }
  const auto r = autocorrelation(x, 20);
  EXPECT_NEAR(r[0], energy, 1e-12);
  for (double rk : r) EXPECT_LE(std::abs(rk), r[0] + 1e-12);
  testutil::expect_errc(Errc::OrderTooHigh, [&] { autocorrelation(x, 100); });
}

TEST(Levinson, GeometricAutocorrelationIsAr1) {
  std::vector<double> r(5);
  for (std::size_t k = 0; k < 5; ++k) r[k] = std::pow(0.8, static_cast<double>(k));
  const LpcFrame lpc = levinson_durbin(r, 4);
  ASSERT_EQ(lpc.coeffs.size(), 4u);
  EXPECT_NEAR(lpc.coeffs[0], 0.8, 1e-8);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_NEAR(lpc.coeffs[i], 0.0, 1e-8);
  ASSERT_TRUE(lpc.gain.has_value());
  EXPECT_NEAR(*lpc.gain, std::sqrt(0.36), 1e-6);
}

TEST(Levinson, WhiteNoiseGivesZeroPredictor) {
  std::vector<double> r(17, 0.0);
  r[0] = 1.0;
  for (double a : levinson_durbin(r, 16).coeffs) EXPECT_EQ(a, 0.0);
}

TEST(Levinson, MatchesDenseToeplitzSolve) {
  std::mt19937_64 rng(21);
  for (std::size_t p : {1u, 4u, 16u, 33u, 64u}) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto r = random_stable_r(rng, p);
      const auto fast = levinson_durbin(r, p).coeffs;
      const auto slow = dense_lpc(r, p);
      for (std::size_t i = 0; i < p; ++i) ASSERT_NEAR(fast[i], slow[i], 1e-6) << "p=" << p;
    }
  }
}

TEST(Levinson, InvalidAutocorrelationBreaksDown) {
  const std::vector<double> r{1.0, 2.0, 0.0};
  testutil::expect_errc(Errc::NumericalBreakdown, [&] { levinson_durbin(r, 2); });
}

TEST(LpcFeatures, ShapeAndDeterminism) {
  PreprocessConfig cfg;
  const auto frames = frame_and_window(noise_segment(3), cfg);
  const FeatureMatrix a = lpc_features(frames, 64);
  EXPECT_EQ(a.kind, FeatureKind::Lpc);
  EXPECT_EQ(a.rows, 64u);
  EXPECT_EQ(a.cols, 129u);
  EXPECT_EQ(a.data, lpc_features(frames, 64).data);
  for (double v : a.data) EXPECT_TRUE(std::isfinite(v));
}

TEST(LpcFeatures, SilentFramesGiveZeroCoefficients) {
  PreprocessConfig cfg;
  const FeatureMatrix a = lpc_features(frame_and_window(std::vector<double>(48000, 0.0), cfg), 64);
  for (double v : a.data) EXPECT_EQ(v, 0.0);
}

TEST(LpcFeatures, RecoversAr2Parameters) {
  // Resonant AR(2): poles at radius 0.99, angle 0.2 pi.
  const double a1 = 2.0 * 0.99 * std::cos(0.2 * std::numbers::pi);
  const double a2 = -0.99 * 0.99;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(48000 + 2000, 0.0);
  for (std::size_t n = 2; n < x.size(); ++n) x[n] = a1 * x[n - 1] + a2 * x[n - 2] + g(rng);
  x.erase(x.begin(), x.begin() + 2000);
  PreprocessConfig cfg;
  const FeatureMatrix m = lpc_features(frame_and_window(x, cfg), 2);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t c = 0; c < m.cols; ++c) {
    EXPECT_NEAR(m.at(0, c), a1, 0.15) << "column " << c;
    EXPECT_NEAR(m.at(1, c), a2, 0.15) << "column " << c;
    m1 += m.at(0, c) / static_cast<double>(m.cols);
    m2 += m.at(1, c) / static_cast<double>(m.cols);
  }
  EXPECT_NEAR(m1, a1, 0.03);
  EXPECT_NEAR(m2, a2, 0.03);
}

TEST(PoolTime, ShapeConstantAndBruteForce) {
  const FeatureMatrix c(FeatureKind::Mfcc, 64, 129, 4.25);
  const FeatureMatrix pc = pool_time(c);
  EXPECT_EQ(pc.rows, 64u);
  EXPECT_EQ(pc.cols, 64u);
  for (double v : pc.data) EXPECT_DOUBLE_EQ(v, 4.25);

  const FeatureMatrix m = random_matrix(FeatureKind::Lpc, 64, 129, 5);
  const FeatureMatrix p = pool_time(m);
  for (std::size_t r = 0; r < 64; ++r) {
    for (std::size_t j = 0; j < 64; ++j) {
      double acc = 0.0;
      for (std::size_t t = 2 * j; t <= 2 * j + 2; ++t) acc += m.at(r, t);
      EXPECT_NEAR(p.at(r, j), acc / 3.0, 1e-12);
    }
  }
  testutil::expect_errc(Errc::WrongShape, [] { pool_time(FeatureMatrix(FeatureKind::Mfcc, 64, 64)); });
}

TEST(PoolTime, IsLinear) {
  const FeatureMatrix x = random_matrix(FeatureKind::Mfcc, 8, 129, 1);
  const FeatureMatrix z = random_matrix(FeatureKind::Mfcc, 8, 129, 2);
  FeatureMatrix mix = x;
  for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = 1.5 * x.data[i] - 0.5 * z.data[i];
  const auto px = pool_time(x), pz = pool_time(z), pm = pool_time(mix);
  for (std::size_t i = 0; i < pm.data.size(); ++i) {
    EXPECT_NEAR(pm.data[i], 1.5 * px.data[i] - 0.5 * pz.data[i], 1e-12);
  }
}

TEST(Fuse, StacksMfccOverLpc) {
  const FeatureMatrix m = random_matrix(FeatureKind::Mfcc, 64, 64, 1);
  const FeatureMatrix l = random_matrix(FeatureKind::Lpc, 64, 64, 2);
  const FeatureMatrix f = fuse(m, l);
  EXPECT_EQ(f.kind, FeatureKind::Fusion);
  EXPECT_EQ(f.rows, 128u);
  EXPECT_EQ(f.cols, 64u);
  for (std::size_t c = 0; c < 64; ++c) {
    EXPECT_EQ(f.at(10, c), m.at(10, c));
    EXPECT_EQ(f.at(70, c), l.at(6, c));
  }
  for (std::size_t r = 0; r < 64; ++r) {
    for (std::size_t c = 0; c < 64; ++c) {
      ASSERT_EQ(f.at(r, c), m.at(r, c));
      ASSERT_EQ(f.at(64 + r, c), l.at(r, c));
    }
  }
  testutil::expect_errc(Errc::ShapeMismatch,
                        [&] { fuse(m, random_matrix(FeatureKind::Lpc, 64, 32, 3)); });
  testutil::expect_errc(Errc::ShapeMismatch, [&] { fuse(l, m); });
}

TEST(AxisVectors, MeansAlongEachAxis) {
  const FeatureMatrix c(FeatureKind::Mfcc, 64, 64, -1.5);
  for (double v : f_vector(c)) EXPECT_DOUBLE_EQ(v, -1.5);
  for (double v : t_vector(c)) EXPECT_DOUBLE_EQ(v, -1.5);

  const FeatureMatrix m = random_matrix(FeatureKind::Fusion, 128, 64, 7);
  const auto fv = f_vector(m);
  const auto tv = t_vector(m);
  ASSERT_EQ(fv.size(), 128u);
  ASSERT_EQ(tv.size(), 64u);
  for (std::size_t r = 0; r < 128; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < 64; ++c) acc += m.at(r, c);
    EXPECT_NEAR(fv[r], acc / 64.0, 1e-7);
  }
  for (std::size_t c = 0; c < 64; ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < 128; ++r) acc += m.at(r, c);
    EXPECT_NEAR(tv[c], acc / 128.0, 1e-7);
  }
}

TEST(ExtractFeatures, ShapeContract) {
  PreprocessConfig cfg;
  const auto bank = build_mel_filterbank(16000, kFftSize, kCoefficients);
  const auto x = noise_segment(12);
  const FeatureMatrix m = extract_features(x, FeatureKind::Mfcc, cfg, bank);
  const FeatureMatrix l = extract_features(x, FeatureKind::Lpc, cfg, bank);
  const FeatureMatrix f = extract_features(x, FeatureKind::Fusion, cfg, bank);
  EXPECT_EQ(m.rows, 64u);
  EXPECT_EQ(m.cols, 64u);
  EXPECT_EQ(l.rows, 64u);
  EXPECT_EQ(f.rows, 128u);
  EXPECT_EQ(f.cols, 64u);
  EXPECT_EQ(f_vector(m).size(), 64u);
  EXPECT_EQ(t_vector(m).size(), 64u);
  for (std::size_t r = 0; r < 64; ++r) {
    for (std::size_t c = 0; c < 64; ++c) EXPECT_EQ(f.at(r, c), m.at(r, c));
  }
}

TEST(Standardize, TrainingSetBecomesZeroMeanUnitStd) {
  std::vector<FeatureMatrix> train;
  for (unsigned s = 0; s < 20; ++s) {
    auto m = random_matrix(FeatureKind::Mfcc, 4, 6, s);
    m.at(1, 1) = 7.0;  // zero-variance position
    train.push_back(m);
  }
  const FeatureStats st = fit_stats(train);
  std::vector<double> mean(24, 0.0), sq(24, 0.0);
  for (const auto& m : train) {
    const auto z = standardize(m, st);
    EXPECT_EQ(z.at(1, 1), 0.0);
    for (std::size_t i = 0; i < 24; ++i) {
      mean[i] += z.data[i] / 20.0;
      sq[i] += z.data[i] * z.data[i] / 20.0;
    }
  }
  for (std::size_t i = 0; i < 24; ++i) {
    EXPECT_LT(std::abs(mean[i]), 1e-6);
    if (st.stddev[i] > 0.0) {
      EXPECT_NEAR(std::sqrt(sq[i] - mean[i] * mean[i]), 1.0, 1e-6);
    }
  }
  for (double s : st.stddev) EXPECT_GE(s, 0.0);
}

TEST(Standardize, RoundTripsThroughInverse) {
  std::vector<FeatureMatrix> train;
  for (unsigned s = 0; s < 10; ++s) train.push_back(random_matrix(FeatureKind::Lpc, 64, 64, s));
  const FeatureStats st = fit_stats(train);
  const FeatureMatrix x = random_matrix(FeatureKind::Lpc, 64, 64, 99);
  const FeatureMatrix back = unstandardize(standardize(x, st), st);
  for (std::size_t i = 0; i < x.data.size(); ++i) EXPECT_NEAR(back.data[i], x.data[i], 1e-6);
  testutil::expect_errc(Errc::ShapeMismatch,
                        [&] { standardize(FeatureMatrix(FeatureKind::Lpc, 2, 2), st); });
}
