// include/vocalscreen/audio.hpp

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

#include <filesystem>
#include <string>
#include <vector>

namespace vocalscreen {

/// Mono waveform in [-1, 1] plus the identity of the recording it came from.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = 16000;
  std::string subject_id;
  std::string recording_id;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

/// Throws InvalidArgument unless the rate is positive and every sample is
/// finite with magnitude at most 1.
void validate(const AudioClip& clip);

/// Reads a RIFF/WAVE PCM16 file (mono or stereo). Stereo is downmixed by the
/// per-sample channel mean; samples are scaled by 1/32768.
AudioClip load_audio(const std::filesystem::path& path);

/// Writes mono PCM16. Samples are rounded and clamped to the int16 range.
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

/// Windowed-sinc low-pass (64 Hamming taps, cutoff at half the lower of the
/// two rates) followed by linear interpolation onto the target grid. Equal
/// rates return the input untouched.
AudioClip resample(const AudioClip& clip, int target_hz);

}  // namespace vocalscreen
