// include/vocalscreen/error.hpp

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

#include <stdexcept>
#include <string>
#include <string_view>

namespace vocalscreen {

/// Every failure the library reports. The CLI maps these to exit codes,
/// so keep `is_validation_error` in sync when adding entries.
enum class Errc {
  InvalidArgument,
  // preprocess
  UnsupportedFormat,
  EmptyAudio,
  EmptyVoiced,
  InvalidLength,
  SegmentTooShort,
  // features
  DegenerateBank,
  OrderTooHigh,
  NumericalBreakdown,
  WrongShape,
  ShapeMismatch,
  // dataset
  DuplicateSubject,
  InvalidLabel,
  MissingRecording,
  InfeasibleComposition,
  BadMagic,
  VersionMismatch,
  TruncatedFile,
  EmptyPredictions,
  LengthMismatch,
  IoError,
  // forest
  SingleClass,
  EmptyData,
  DimensionMismatch,
  // nn
  InvalidSpec,
  EmptySplit,
  DivergedLoss,
};

std::string_view errc_name(Errc code) noexcept;

/// True for errors caused by bad input (exit code 2), false for failures
/// that happen while doing the work (exit code 3).
bool is_validation_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace vocalscreen
