// src/synth.cpp

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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "vocalscreen/dataset.hpp"
#include "vocalscreen/error.hpp"
#include "vocalscreen/rng.hpp"

namespace vocalscreen {

namespace {

constexpr int kRate = 16000;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kTableSize = 4096;
constexpr double kMaxHarmonicHz = 7000.0;
constexpr double kNoiseFloor = 1e-3;  // about -60 dBFS

std::string subject_name(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%03zu", index);
  return buf;
}

/// One period of the voice's harmonic waveform, peak-normalised.
std::vector<double> wavetable(const SynthVoice& v, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::vector<double> table(kTableSize, 0.0);
  for (std::size_t h = 0; h < v.harmonics.size(); ++h) {
    const double ph = phase(rng);
    const double k = static_cast<double>(h + 1);
    for (std::size_t n = 0; n < kTableSize; ++n) {
      table[n] += v.harmonics[h] * std::sin(kTwoPi * k * static_cast<double>(n) / kTableSize + ph);
    }
  }
  double peak = 0.0;
  for (double x : table) peak = std::max(peak, std::abs(x));
  for (double& x : table) x /= peak;
  return table;
}

}  // namespace

SynthVoice synth_voice(std::size_t index, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, {index, 0}));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> timbre(0.0, 0.4);

  SynthVoice v;
  v.subject_id = subject_name(index);
  v.label = static_cast<int>(index % 2);
  v.sex = (index / 2) % 2 == 0 ? Sex::M : Sex::F;
  const bool low = v.label == 1;
  v.f0_hz = (low ? 110.0 : 170.0) + 10.0 * u(rng);
  v.tilt = (low ? 1.6 : 1.0) + 0.1 * u(rng);
  v.am_rate_hz = low ? 2.0 + 0.5 * u(rng) : 5.0 + u(rng);
  v.am_depth = 0.5 + 0.1 * u(rng);

  // Leave room for vibrato and intonation so no harmonic aliases.
  const auto n_harm = static_cast<std::size_t>(kMaxHarmonicHz / (v.f0_hz * 1.06));
  v.harmonics.resize(n_harm);
  for (std::size_t h = 0; h < n_harm; ++h) {
    v.harmonics[h] = std::pow(static_cast<double>(h + 1), -v.tilt) * std::exp(timbre(rng));
  }
  return v;
}

std::vector<SynthVoice> synth_voices(std::size_t n_subjects, std::uint64_t seed) {
  if (n_subjects < 8 || n_subjects % 2 != 0) {
    throw Error(Errc::InvalidArgument, "synthetic corpus needs an even subject count >= 8");
  }
  std::vector<SynthVoice> voices;
  voices.reserve(n_subjects);
  for (std::size_t i = 0; i < n_subjects; ++i) voices.push_back(synth_voice(i, seed));
  return voices;
}

AudioClip render_recording(const SynthVoice& voice, std::size_t recording, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, {stable_hash(voice.subject_id), recording, 1}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, kNoiseFloor);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const std::vector<double> table = wavetable(voice, rng);
  const double total_s = uniform(11.5, 12.5);
  const double gain = std::pow(10.0, uniform(-20.0, 0.0) / 20.0);
  const double vib_rate = uniform(0.3, 0.8);
  const double vib_phase = uniform(0.0, kTwoPi);
  const double am_phase = uniform(0.0, kTwoPi);

  AudioClip clip;
  clip.sample_rate_hz = kRate;
  clip.subject_id = voice.subject_id;
  clip.recording_id = voice.subject_id + "_r" + std::to_string(recording);
  const auto n_total = static_cast<std::size_t>(total_s * kRate);
  clip.samples.resize(n_total);
  for (double& x : clip.samples) x = noise(rng);

  const auto ramp = static_cast<std::size_t>(0.02 * kRate);
  double phase = 0.0;
  std::size_t pos = static_cast<std::size_t>(0.1 * kRate);
  while (pos < n_total) {
    const auto len = std::min(static_cast<std::size_t>(uniform(1.5, 3.0) * kRate), n_total - pos);
    for (std::size_t i = 0; i < len; ++i) {
      const double t = static_cast<double>(pos + i) / kRate;
      const double progress = static_cast<double>(i) / static_cast<double>(len);
      const double f = voice.f0_hz * (1.03 - 0.06 * progress) *
                       (1.0 + 0.02 * std::sin(kTwoPi * vib_rate * t + vib_phase));
      phase += f / kRate;
      phase -= std::floor(phase);
      const double idx = phase * kTableSize;
      const auto i0 = static_cast<std::size_t>(idx) % kTableSize;
      const double frac = idx - std::floor(idx);
      const double s = table[i0] * (1.0 - frac) + table[(i0 + 1) % kTableSize] * frac;
      const double env =
          1.0 - voice.am_depth * 0.5 * (1.0 - std::cos(kTwoPi * voice.am_rate_hz * t + am_phase));
      const double edge = std::min({1.0, static_cast<double>(i) / ramp,
                                    static_cast<double>(len - i) / ramp});
      clip.samples[pos + i] += 0.5 * gain * env * edge * s;
    }
    pos += len + static_cast<std::size_t>(uniform(0.3, 0.6) * kRate);
  }
  for (double& x : clip.samples) x = std::clamp(x, -1.0, 1.0);
  return clip;
}

Manifest synth_corpus(std::size_t n_subjects, std::uint64_t seed, const std::filesystem::path& out_dir) {
  const auto voices = synth_voices(n_subjects, seed);
  Manifest m;
  m.dataset_name = "synthetic";
  m.base_dir = out_dir;
  for (std::size_t i = 0; i < voices.size(); ++i) {
    const SynthVoice& v = voices[i];
    SubjectRecord s;
    s.id = v.subject_id;
    s.label = v.label;
    s.sex = v.sex;
    s.age = 20 + static_cast<int>(derive_seed(seed, {i, 2}) % 40);
    for (std::size_t r = 0; r < kSynthRecordings; ++r) {
      AudioClip clip = render_recording(v, r, seed);
      const std::filesystem::path rel = std::filesystem::path("wav") / (clip.recording_id + ".wav");
      write_wav(out_dir / rel, clip);
      s.recordings.push_back({clip.recording_id, rel});
    }
    m.subjects.push_back(std::move(s));
  }
  save_manifest(m, out_dir / "manifest.json");
  return m;
}

}  // namespace vocalscreen
