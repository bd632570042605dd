// src/augment.cpp

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

#include "vocalscreen/augment.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "vocalscreen/error.hpp"

namespace vocalscreen {

using nlohmann::json;

void MaskConfig::validate(std::size_t rows, std::size_t cols) const {
  if (max_f_width > rows) throw Error(Errc::InvalidArgument, "max_f_width exceeds the row count");
  if (max_t_width > cols) throw Error(Errc::InvalidArgument, "max_t_width exceeds the column count");
}

void to_json(json& j, const MaskConfig& cfg) {
  j = json{{"max_f_width", cfg.max_f_width},
           {"max_t_width", cfg.max_t_width},
           {"masks_per_axis", cfg.masks_per_axis},
           {"fill_value", cfg.fill_value}};
}

void from_json(const json& j, MaskConfig& cfg) {
  cfg.max_f_width = j.value("max_f_width", cfg.max_f_width);
  cfg.max_t_width = j.value("max_t_width", cfg.max_t_width);
  cfg.masks_per_axis = j.value("masks_per_axis", cfg.masks_per_axis);
  cfg.fill_value = j.value("fill_value", cfg.fill_value);
}

std::string_view to_string(MaskMode mode) {
  switch (mode) {
    case MaskMode::None: return "none";
    case MaskMode::Time: return "t";
    case MaskMode::Freq: return "f";
    case MaskMode::TimeFreq: return "tf";
  }
  return "none";
}

MaskMode parse_mask_mode(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "none" || s == "original") return MaskMode::None;
  if (s == "t" || s == "time") return MaskMode::Time;
  if (s == "f" || s == "freq") return MaskMode::Freq;
  if (s == "tf" || s == "time-freq") return MaskMode::TimeFreq;
  throw Error(Errc::InvalidArgument, "unknown mask mode '" + s + "'");
}

MaskRegion draw_region(std::size_t extent, std::size_t max_width, std::mt19937_64& rng) {
  max_width = std::min(max_width, extent);
  MaskRegion r;
  r.width = std::uniform_int_distribution<std::size_t>(0, max_width)(rng);
  r.start = std::uniform_int_distribution<std::size_t>(0, extent - r.width)(rng);
  return r;
}

namespace {

void fill_cols_raw(double* v, std::size_t rows, std::size_t cols, MaskRegion r, double value) {
  for (std::size_t i = 0; i < rows; ++i) std::fill_n(v + i * cols + r.start, r.width, value);
}

void fill_rows_raw(double* v, std::size_t cols, MaskRegion r, double value) {
  std::fill_n(v + r.start * cols, r.width * cols, value);
}

}  // namespace

void fill_columns(FeatureMatrix& fm, MaskRegion r, double value) {
  fill_cols_raw(fm.data.data(), fm.rows, fm.cols, r, value);
}

void fill_rows(FeatureMatrix& fm, MaskRegion r, double value) { fill_rows_raw(fm.data.data(), fm.cols, r, value); }

void apply_mask(double* values, std::size_t rows, std::size_t cols, MaskMode mode,
                const MaskConfig& cfg, std::mt19937_64& rng) {
  if (mode == MaskMode::Freq || mode == MaskMode::TimeFreq) {
    for (std::size_t m = 0; m < cfg.masks_per_axis; ++m) {
      fill_rows_raw(values, cols, draw_region(rows, cfg.max_f_width, rng), cfg.fill_value);
    }
  }
  if (mode == MaskMode::Time || mode == MaskMode::TimeFreq) {
    for (std::size_t m = 0; m < cfg.masks_per_axis; ++m) {
      fill_cols_raw(values, rows, cols, draw_region(cols, cfg.max_t_width, rng), cfg.fill_value);
    }
  }
}

FeatureMatrix mask_time(const FeatureMatrix& fm, const MaskConfig& cfg, std::mt19937_64& rng) {
  FeatureMatrix out = fm;
  apply_mask(out.data.data(), out.rows, out.cols, MaskMode::Time, cfg, rng);
  return out;
}

FeatureMatrix mask_freq(const FeatureMatrix& fm, const MaskConfig& cfg, std::mt19937_64& rng) {
  FeatureMatrix out = fm;
  apply_mask(out.data.data(), out.rows, out.cols, MaskMode::Freq, cfg, rng);
  return out;
}

FeatureMatrix mask_tf(const FeatureMatrix& fm, const MaskConfig& cfg, std::mt19937_64& rng) {
  FeatureMatrix out = fm;
  apply_mask(out.data.data(), out.rows, out.cols, MaskMode::TimeFreq, cfg, rng);
  return out;
}

}  // namespace vocalscreen
