// src/error.cpp

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

#include "vocalscreen/error.hpp"

namespace vocalscreen {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::EmptyAudio: return "EmptyAudio";
    case Errc::EmptyVoiced: return "EmptyVoiced";
    case Errc::InvalidLength: return "InvalidLength";
    case Errc::SegmentTooShort: return "SegmentTooShort";
    case Errc::DegenerateBank: return "DegenerateBank";
    case Errc::OrderTooHigh: return "OrderTooHigh";
    case Errc::NumericalBreakdown: return "NumericalBreakdown";
    case Errc::WrongShape: return "WrongShape";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::DuplicateSubject: return "DuplicateSubject";
    case Errc::InvalidLabel: return "InvalidLabel";
    case Errc::MissingRecording: return "MissingRecording";
    case Errc::InfeasibleComposition: return "InfeasibleComposition";
    case Errc::BadMagic: return "BadMagic";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::EmptyPredictions: return "EmptyPredictions";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::IoError: return "IoError";
    case Errc::SingleClass: return "SingleClass";
    case Errc::EmptyData: return "EmptyData";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::EmptySplit: return "EmptySplit";
    case Errc::DivergedLoss: return "DivergedLoss";
  }
  return "Unknown";
}

bool is_validation_error(Errc code) noexcept {
  switch (code) {
    case Errc::NumericalBreakdown:
    case Errc::IoError:
    case Errc::DivergedLoss:
      return false;
    default:
      return true;
  }
}

}  // namespace vocalscreen
