// src/preprocess.cpp

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

#include "vocalscreen/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "vocalscreen/error.hpp"

namespace vocalscreen {

namespace {

constexpr double kRmsFloor = 1e-10;

}  // namespace

void PreprocessConfig::validate() const {
  auto bad = [](const std::string& what) { return Error(Errc::InvalidArgument, what); };
  if (!(mu > 0.0 && mu <= 1.0)) throw bad("mu must lie in (0, 1]");
  if (target_rate_hz <= 0) throw bad("target_rate_hz must be positive");
  if (silence_frame_ms <= 0) throw bad("silence_frame_ms must be positive");
  if (min_silence_ms < 0) throw bad("min_silence_ms must be non-negative");
  if (!(segment_seconds > 0.0)) throw bad("segment_seconds must be positive");
  if (frame_len < 2) throw bad("frame_len must be at least 2");
  if (frames_per_segment != 2 * kPooledColumns + 1) {
    throw bad("frames_per_segment must be 129 so pooling yields 64 columns");
  }
  if (segment_samples() < frame_len + frames_per_segment - 1) {
    throw bad("segment too short for the requested framing");
  }
}

std::size_t PreprocessConfig::segment_samples() const {
  return static_cast<std::size_t>(std::llround(segment_seconds * target_rate_hz));
}

void to_json(nlohmann::json& j, const PreprocessConfig& cfg) {
  j = nlohmann::json{{"mu", cfg.mu},
                     {"target_rate_hz", cfg.target_rate_hz},
                     {"silence_frame_ms", cfg.silence_frame_ms},
                     {"min_silence_ms", cfg.min_silence_ms},
                     {"segment_seconds", cfg.segment_seconds},
                     {"frame_len", cfg.frame_len},
                     {"frames_per_segment", cfg.frames_per_segment}};
}

void from_json(const nlohmann::json& j, PreprocessConfig& cfg) {
  cfg.mu = j.value("mu", cfg.mu);
  cfg.target_rate_hz = j.value("target_rate_hz", cfg.target_rate_hz);
  cfg.silence_frame_ms = j.value("silence_frame_ms", cfg.silence_frame_ms);
  cfg.min_silence_ms = j.value("min_silence_ms", cfg.min_silence_ms);
  cfg.segment_seconds = j.value("segment_seconds", cfg.segment_seconds);
  cfg.frame_len = j.value("frame_len", cfg.frame_len);
  cfg.frames_per_segment = j.value("frames_per_segment", cfg.frames_per_segment);
}

SilenceAnalysis analyze_silence(const AudioClip& clip, const PreprocessConfig& cfg) {
  if (clip.samples.empty()) {
    throw Error(Errc::EmptyAudio, "cannot analyze an empty clip");
  }
  SilenceAnalysis a;
  a.frame_samples = std::max<std::size_t>(
      1, static_cast<std::size_t>(clip.sample_rate_hz) * cfg.silence_frame_ms / 1000);
  const std::size_t n = clip.samples.size();
  const std::size_t frames = (n + a.frame_samples - 1) / a.frame_samples;

  std::vector<bool> digital_silence(frames);
  a.levels_db.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t b = f * a.frame_samples;
    const std::size_t e = std::min(n, b + a.frame_samples);
    double energy = 0.0;
    for (std::size_t i = b; i < e; ++i) energy += clip.samples[i] * clip.samples[i];
    const double rms = std::sqrt(energy / static_cast<double>(e - b));
    digital_silence[f] = rms == 0.0;
    a.levels_db[f] = 20.0 * std::log10(rms + kRmsFloor);
  }
  a.threshold_db =
      std::accumulate(a.levels_db.begin(), a.levels_db.end(), 0.0) / static_cast<double>(frames);

  a.below.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    a.below[f] = digital_silence[f] || a.levels_db[f] < a.threshold_db;
  }

  const auto min_run_samples =
      static_cast<std::size_t>(clip.sample_rate_hz) * static_cast<std::size_t>(cfg.min_silence_ms) / 1000;
  for (std::size_t f = 0; f < frames;) {
    if (!a.below[f]) {
      ++f;
      continue;
    }
    std::size_t g = f;
    while (g < frames && a.below[g]) ++g;
    const std::size_t begin = f * a.frame_samples;
    const std::size_t end = std::min(n, g * a.frame_samples);
    if (end - begin >= min_run_samples) {
      a.deleted.push_back({f, g - f, begin, end});
    }
    f = g;
  }
  return a;
}

AudioClip remove_silence(const AudioClip& clip, const PreprocessConfig& cfg) {
  const SilenceAnalysis a = analyze_silence(clip, cfg);
  if (std::all_of(a.below.begin(), a.below.end(), [](bool b) { return b; })) {
    throw Error(Errc::EmptyVoiced,
                "recording '" + clip.recording_id + "' has no frame above the silence threshold");
  }
  AudioClip out = clip;
  out.samples.clear();
  std::size_t cursor = 0;
  for (const auto& run : a.deleted) {
    out.samples.insert(out.samples.end(), clip.samples.begin() + static_cast<std::ptrdiff_t>(cursor),
                       clip.samples.begin() + static_cast<std::ptrdiff_t>(run.begin_sample));
    cursor = run.end_sample;
  }
  out.samples.insert(out.samples.end(), clip.samples.begin() + static_cast<std::ptrdiff_t>(cursor),
                     clip.samples.end());
  return out;
}

std::vector<double> pre_emphasize(std::span<const double> x, double mu) {
  if (!(mu > 0.0 && mu <= 1.0)) {
    throw Error(Errc::InvalidArgument, "mu must lie in (0, 1]");
  }
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0];
  for (std::size_t t = 1; t < x.size(); ++t) y[t] = x[t] - mu * x[t - 1];
  return y;
}

AudioClip pre_emphasize(const AudioClip& clip, double mu) {
  AudioClip out = clip;
  out.samples = pre_emphasize(clip.samples, mu);
  return out;
}

std::vector<Segment> segment(const AudioClip& clip, const PreprocessConfig& cfg) {
  if (clip.sample_rate_hz != cfg.target_rate_hz) {
    throw Error(Errc::InvalidArgument, "segment expects audio at the target rate");
  }
  const std::size_t len = cfg.segment_samples();
  if (len == 0) {
    throw Error(Errc::InvalidArgument, "segment length rounds to zero samples");
  }
  const std::size_t count = clip.samples.size() / len;
  std::vector<Segment> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    Segment seg;
    const auto first = clip.samples.begin() + static_cast<std::ptrdiff_t>(s * len);
    seg.samples.assign(first, first + static_cast<std::ptrdiff_t>(len));
    seg.start_offset_s = static_cast<double>(s * len) / clip.sample_rate_hz;
    seg.index = s;
    seg.subject_id = clip.subject_id;
    seg.recording_id = clip.recording_id;
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<double> hamming(std::size_t n) {
  if (n < 2) {
    throw Error(Errc::InvalidLength, "Hamming window needs at least two points");
  }
  std::vector<double> w(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom);
  }
  return w;
}

FrameMatrix frame_and_window(std::span<const double> samples, const PreprocessConfig& cfg) {
  const std::size_t len = samples.size();
  if (cfg.frames_per_segment < 2 || len < cfg.frame_len + cfg.frames_per_segment - 1) {
    throw Error(Errc::SegmentTooShort, "segment of " + std::to_string(len) +
                                           " samples cannot hold the requested frames");
  }
  const std::vector<double> window = hamming(cfg.frame_len);
  FrameMatrix fm;
  fm.rows = cfg.frames_per_segment;
  fm.cols = cfg.frame_len;
  fm.hop = (len - cfg.frame_len) / (cfg.frames_per_segment - 1);
  fm.values.resize(fm.rows * fm.cols);
  for (std::size_t f = 0; f < fm.rows; ++f) {
    const double* src = samples.data() + f * fm.hop;
    auto dst = fm.row(f);
    for (std::size_t i = 0; i < fm.cols; ++i) dst[i] = src[i] * window[i];
  }
  return fm;
}

FrameMatrix frame_and_window(const Segment& seg, const PreprocessConfig& cfg) {
  return frame_and_window(std::span<const double>(seg.samples), cfg);
}

AudioClip voiced_stream(const AudioClip& clip, const PreprocessConfig& cfg) {
  return remove_silence(resample(clip, cfg.target_rate_hz), cfg);
}

std::vector<Segment> segments_from_voiced(const AudioClip& voiced, const PreprocessConfig& cfg) {
  return segment(pre_emphasize(voiced, cfg.mu), cfg);
}

}  // namespace vocalscreen
