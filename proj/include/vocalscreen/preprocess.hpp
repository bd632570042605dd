// include/vocalscreen/preprocess.hpp

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
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "vocalscreen/audio.hpp"

namespace vocalscreen {

/// Number of time columns left after one window-3/stride-2 pooling pass.
inline constexpr std::size_t kPooledColumns = 64;

struct PreprocessConfig {
  double mu = 0.97;
  int target_rate_hz = 16000;
  int silence_frame_ms = 25;
  int min_silence_ms = 200;
  double segment_seconds = 3.0;
  std::size_t frame_len = 512;
  std::size_t frames_per_segment = 2 * kPooledColumns + 1;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;

  std::size_t segment_samples() const;
};

void to_json(nlohmann::json& j, const PreprocessConfig& cfg);
/// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, PreprocessConfig& cfg);

struct Segment {
  std::vector<double> samples;
  double start_offset_s = 0.0;
  std::size_t index = 0;
  std::string subject_id;
  std::string recording_id;
};

/// Row-major frames x frame_len matrix of windowed samples.
struct FrameMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t hop = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }
  std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }
};

/// Per-frame levels and the runs that were cut, kept so callers can audit
/// the silence decision.
struct SilenceAnalysis {
  struct Run {
    std::size_t first_frame = 0;
    std::size_t frame_count = 0;
    std::size_t begin_sample = 0;
    std::size_t end_sample = 0;
  };
  std::size_t frame_samples = 0;
  std::vector<double> levels_db;
  double threshold_db = 0.0;
  std::vector<bool> below;
  std::vector<Run> deleted;
};

SilenceAnalysis analyze_silence(const AudioClip& clip, const PreprocessConfig& cfg);

/// Deletes runs of below-mean-level frames lasting at least min_silence_ms
/// and splices the rest back together. Throws EmptyVoiced when no frame is
/// at or above the threshold.
AudioClip remove_silence(const AudioClip& clip, const PreprocessConfig& cfg);

/// y(0) = x(0); y(t) = x(t) - mu * x(t - 1).
AudioClip pre_emphasize(const AudioClip& clip, double mu);
std::vector<double> pre_emphasize(std::span<const double> x, double mu);

/// Non-overlapping windows of segment_seconds; the short tail is dropped.
std::vector<Segment> segment(const AudioClip& clip, const PreprocessConfig& cfg);

/// Symmetric Hamming window, 0.54 - 0.46 cos(2 pi n / (N - 1)).
std::vector<double> hamming(std::size_t n);

/// Extracts exactly frames_per_segment frames with a hop derived from the
/// segment length, each multiplied by the Hamming window.
FrameMatrix frame_and_window(std::span<const double> samples, const PreprocessConfig& cfg);
FrameMatrix frame_and_window(const Segment& seg, const PreprocessConfig& cfg);

/// resample -> remove_silence. The result is the voiced stream that
/// segment offsets refer to.
AudioClip voiced_stream(const AudioClip& clip, const PreprocessConfig& cfg);

/// pre_emphasize -> segment on an already voiced stream.
std::vector<Segment> segments_from_voiced(const AudioClip& voiced, const PreprocessConfig& cfg);

}  // namespace vocalscreen
