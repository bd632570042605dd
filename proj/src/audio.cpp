// src/audio.cpp

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

#include "vocalscreen/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "vocalscreen/error.hpp"
#include "vocalscreen/io_util.hpp"

namespace vocalscreen {

namespace {

constexpr int kResampleTaps = 64;

struct WavFormat {
  std::uint16_t audio_format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
};

}  // namespace

void validate(const AudioClip& clip) {
  if (clip.sample_rate_hz <= 0) {
    throw Error(Errc::InvalidArgument, "sample rate must be positive");
  }
  for (double s : clip.samples) {
    if (!std::isfinite(s) || std::abs(s) > 1.0) {
      throw Error(Errc::InvalidArgument,
                  "sample out of range in recording '" + clip.recording_id + "'");
    }
  }
}

AudioClip load_audio(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  ByteReader in(bytes);
  auto fail = [&](const std::string& why) {
    return Error(Errc::UnsupportedFormat, path.string() + ": " + why);
  };

  if (!in.can_read(12) || in.take(4) != "RIFF") throw fail("not a RIFF file");
  in.get<std::uint32_t>();
  if (in.take(4) != "WAVE") throw fail("not a WAVE file");

  WavFormat fmt;
  bool have_fmt = false;
  std::string_view data;
  bool have_data = false;
  while (in.can_read(8)) {
    const std::string_view id = in.take(4);
    const auto size = in.get<std::uint32_t>();
    if (!in.can_read(size)) {
      // Tolerate a data chunk whose declared size overshoots the file.
      if (id == "data") {
        data = in.take(in.remaining());
        have_data = true;
      }
      break;
    }
    std::string_view body = in.take(size);
    if (size % 2 == 1 && in.can_read(1)) in.take(1);
    if (id == "fmt ") {
      if (body.size() < 16) throw fail("short fmt chunk");
      ByteReader f(body);
      fmt.audio_format = f.get<std::uint16_t>();
      fmt.channels = f.get<std::uint16_t>();
      fmt.sample_rate = f.get<std::uint32_t>();
      f.get<std::uint32_t>();
      f.get<std::uint16_t>();
      fmt.bits_per_sample = f.get<std::uint16_t>();
      have_fmt = true;
    } else if (id == "data") {
      data = body;
      have_data = true;
    }
  }
  if (!have_fmt || !have_data) throw fail("missing fmt or data chunk");
  if (fmt.audio_format != 1 || fmt.bits_per_sample != 16) throw fail("only PCM16 is supported");
  if (fmt.channels != 1 && fmt.channels != 2) throw fail("only mono or stereo is supported");
  if (fmt.sample_rate == 0) throw fail("zero sample rate");

  const std::size_t frames = data.size() / (2u * fmt.channels);
  if (frames == 0) {
    throw Error(Errc::EmptyAudio, path.string() + ": no samples");
  }
  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(fmt.sample_rate);
  clip.recording_id = path.stem().string();
  clip.samples.resize(frames);
  ByteReader pcm(data);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < fmt.channels; ++c) {
      acc += static_cast<double>(pcm.get<std::int16_t>()) / 32768.0;
    }
    clip.samples[i] = acc / fmt.channels;
  }
  return clip;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  const auto n = static_cast<std::uint32_t>(clip.samples.size());
  std::string out;
  out.reserve(44 + 2 * static_cast<std::size_t>(n));
  out += "RIFF";
  put_le<std::uint32_t>(out, 36 + 2 * n);
  out += "WAVEfmt ";
  put_le<std::uint32_t>(out, 16);
  put_le<std::uint16_t>(out, 1);
  put_le<std::uint16_t>(out, 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(clip.sample_rate_hz));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(clip.sample_rate_hz) * 2);
  put_le<std::uint16_t>(out, 2);
  put_le<std::uint16_t>(out, 16);
  out += "data";
  put_le<std::uint32_t>(out, 2 * n);
  for (double s : clip.samples) {
    const double scaled = std::round(s * 32768.0);
    put_le<std::int16_t>(out, static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0)));
  }
  write_file_atomic(path, out);
}

AudioClip resample(const AudioClip& clip, int target_hz) {
  validate(clip);
  if (target_hz <= 0) {
    throw Error(Errc::InvalidArgument, "target rate must be positive");
  }
  if (target_hz == clip.sample_rate_hz) {
    return clip;
  }
  const int src_hz = clip.sample_rate_hz;
  const auto& x = clip.samples;
  const auto n = static_cast<std::ptrdiff_t>(x.size());

  // Windowed sinc, centred between taps 31 and 32, unit DC gain.
  const double fc = 0.5 * std::min(src_hz, target_hz) / src_hz;
  const double centre = 0.5 * (kResampleTaps - 1);
  std::vector<double> taps(kResampleTaps);
  double sum = 0.0;
  for (int m = 0; m < kResampleTaps; ++m) {
    const double t = m - centre;
    const double arg = 2.0 * std::numbers::pi * fc * t;
    const double sinc = 2.0 * fc * std::sin(arg) / arg;
    const double window =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * m / (kResampleTaps - 1));
    taps[m] = sinc * window;
    sum += taps[m];
  }
  for (double& t : taps) t /= sum;

  // filtered[j] is the low-passed signal at source time (j - 1) + 0.5; the
  // input is extended by edge replication so constants survive at the ends.
  auto at = [&](std::ptrdiff_t i) { return x[std::clamp<std::ptrdiff_t>(i, 0, n - 1)]; };
  std::vector<double> filtered(static_cast<std::size_t>(n) + 1);
  for (std::ptrdiff_t j = 0; j <= n; ++j) {
    const std::ptrdiff_t base = j - 1 + kResampleTaps / 2;
    double acc = 0.0;
    for (int m = 0; m < kResampleTaps; ++m) acc += taps[m] * at(base - m);
    filtered[j] = acc;
  }

  AudioClip out = clip;
  out.sample_rate_hz = target_hz;
  const auto out_len = static_cast<std::size_t>(
      static_cast<std::int64_t>(n) * target_hz / src_hz);
  out.samples.assign(out_len, 0.0);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * src_hz / target_hz + 0.5;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    const std::size_t hi = std::min(lo + 1, filtered.size() - 1);
    const double v = (1.0 - frac) * filtered[lo] + frac * filtered[hi];
    out.samples[i] = std::clamp(v, -1.0, 1.0);
  }
  return out;
}

}  // namespace vocalscreen
