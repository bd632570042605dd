// include/vocalscreen/augment.hpp

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
#include <random>
#include <string_view>

#include "json.hpp"

#include "vocalscreen/features.hpp"

namespace vocalscreen {

struct MaskConfig {
  std::size_t max_f_width = 8;
  std::size_t max_t_width = 12;
  std::size_t masks_per_axis = 1;
  double fill_value = 0.0;

  /// Throws InvalidArgument when a width exceeds the matrix.
  void validate(std::size_t rows, std::size_t cols) const;
};

void to_json(nlohmann::json& j, const MaskConfig& cfg);
void from_json(const nlohmann::json& j, MaskConfig& cfg);

enum class MaskMode { None, Time, Freq, TimeFreq };

std::string_view to_string(MaskMode mode);
/// "none", "t", "f" or "tf".
MaskMode parse_mask_mode(std::string_view name);

/// A contiguous band [start, start + width) along one axis.
struct MaskRegion {
  std::size_t start = 0;
  std::size_t width = 0;
};

/// width ~ U{0..max_width}, start ~ U{0..extent - width}.
MaskRegion draw_region(std::size_t extent, std::size_t max_width, std::mt19937_64& rng);

void fill_columns(FeatureMatrix& fm, MaskRegion r, double value);
void fill_rows(FeatureMatrix& fm, MaskRegion r, double value);

FeatureMatrix mask_time(const FeatureMatrix& fm, const MaskConfig& cfg, std::mt19937_64& rng);
FeatureMatrix mask_freq(const FeatureMatrix& fm, const MaskConfig& cfg, std::mt19937_64& rng);
/// Frequency masks first, then time masks.
FeatureMatrix mask_tf(const FeatureMatrix& fm, const MaskConfig& cfg, std::mt19937_64& rng);

/// In-place masking of a rows x cols block of values; dispatches on mode.
void apply_mask(double* values, std::size_t rows, std::size_t cols, MaskMode mode,
                const MaskConfig& cfg, std::mt19937_64& rng);

}  // namespace vocalscreen
