// include/vocalscreen/pipeline.hpp

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
#include <cstdint>
#include <span>
#include <vector>

#include "vocalscreen/dataset.hpp"

namespace vocalscreen {

/// A raw recording and the label of the subject it belongs to.
struct LabeledClip {
  AudioClip clip;
  int label = 0;
};

/// Voiced stream, pre-emphasis, segmentation and feature extraction for every
/// clip. Returns one dataset per requested kind, records in clip order then
/// segment order. Clips are processed on up to `jobs` threads.
std::vector<FeatureDataset> extract_clips(std::span<const LabeledClip> clips,
                                          std::span<const FeatureKind> kinds,
                                          const PreprocessConfig& cfg, std::size_t jobs);

FeatureDataset extract_clips(std::span<const LabeledClip> clips, FeatureKind kind,
                             const PreprocessConfig& cfg, std::size_t jobs);

/// Loads every manifest recording from disk, then as extract_clips.
std::vector<FeatureDataset> extract_manifest(const Manifest& m, std::span<const FeatureKind> kinds,
                                             const PreprocessConfig& cfg, std::size_t jobs);

/// Renders the synthetic corpus in memory and extracts it, skipping WAV I/O.
/// Also returns the matching manifest (paths point nowhere).
std::vector<FeatureDataset> synth_features(std::size_t n_subjects, std::uint64_t seed,
                                           std::span<const FeatureKind> kinds,
                                           const PreprocessConfig& cfg, std::size_t jobs,
                                           Manifest* manifest = nullptr);

/// Rounds every value through float32, matching what a cache round trip
/// would give.
void quantize(FeatureDataset& ds);

}  // namespace vocalscreen
