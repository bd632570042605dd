// include/vocalscreen/dataset.hpp

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
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "vocalscreen/audio.hpp"
#include "vocalscreen/features.hpp"

namespace vocalscreen {

// ---------------------------------------------------------------------------
// Manifest

enum class Sex : std::uint8_t { M, F };

struct RecordingRef {
  std::string recording_id;
  /// As written in the manifest; see Manifest::resolve.
  std::filesystem::path path;
};

struct SubjectRecord {
  std::string id;
  int label = 0;  // 0 normal, 1 depressed
  Sex sex = Sex::M;
  std::optional<int> age;
  std::vector<RecordingRef> recordings;
};

struct Manifest {
  std::string dataset_name;
  std::vector<SubjectRecord> subjects;
  /// Directory relative recording paths are resolved against.
  std::filesystem::path base_dir;

  const SubjectRecord* find(std::string_view id) const;
  std::size_t recording_count() const;
  std::filesystem::path resolve(const RecordingRef& rec) const;
};

/// Throws DuplicateSubject, InvalidLabel or MissingRecording.
void validate(const Manifest& m);

Manifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json manifest_to_json(const Manifest& m);
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& m, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Splitting

struct SplitPolicy {
  enum class Kind { PaperModma, Stratified };
  Kind kind = Kind::Stratified;
  /// Only used by Stratified.
  double test_fraction = 0.2;

  static SplitPolicy paper_modma() { return {Kind::PaperModma, 0.0}; }
  static SplitPolicy stratified(double fraction) { return {Kind::Stratified, fraction}; }
};

struct SplitPlan {
  std::vector<std::string> train_subject_ids;
  std::vector<std::string> test_subject_ids;
  std::uint64_t seed = 0;
  std::string policy;
};

/// PaperModma puts 3 male + 2 female subjects of each label in test.
/// Stratified draws round(fraction * n) subjects of each label, spreading
/// them over sexes in proportion. Deterministic for a given seed.
SplitPlan split_subjects(const Manifest& m, const SplitPolicy& policy, std::uint64_t seed);

nlohmann::json split_to_json(const SplitPlan& plan);
SplitPlan split_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Synthetic corpus

struct SynthVoice {
  std::string subject_id;
  int label = 0;
  Sex sex = Sex::M;
  double f0_hz = 0.0;
  double tilt = 0.0;
  double am_rate_hz = 0.0;
  double am_depth = 0.0;
  /// Amplitude of harmonic h + 1.
  std::vector<double> harmonics;
};

inline constexpr std::size_t kSynthRecordings = 4;

/// Voice parameters of subject `index`; even indices are label 0.
SynthVoice synth_voice(std::size_t index, std::uint64_t seed);

/// One ~12 s recording at 16 kHz: voiced chunks separated by near-silent
/// pauses, with a random per-recording gain.
AudioClip render_recording(const SynthVoice& voice, std::size_t recording, std::uint64_t seed);

/// Writes manifest.json and wav/<subject>_r<k>.wav under out_dir. n_subjects
/// must be even and at least 8.
Manifest synth_corpus(std::size_t n_subjects, std::uint64_t seed, const std::filesystem::path& out_dir);

/// Same corpus with no files: voices only, for in-memory pipelines.
std::vector<SynthVoice> synth_voices(std::size_t n_subjects, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Feature cache

struct SegmentRecord {
  std::string subject_id;
  std::string recording_id;
  std::size_t segment_index = 0;
  double start_offset_s = 0.0;
  int label = 0;

  /// "subject|recording|index|offset"; the offset uses the shortest exact
  /// decimal form so decoding is lossless.
  std::string encode_id() const;
  static SegmentRecord decode_id(std::string_view id, int label);

  bool operator==(const SegmentRecord&) const = default;
};

struct FeatureDataset {
  FeatureKind kind = FeatureKind::Mfcc;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<SegmentRecord> records;
  std::vector<FeatureMatrix> matrices;

  std::size_t size() const { return records.size(); }
  /// Records whose subject is in `subjects`, in original order.
  FeatureDataset subset(const std::set<std::string>& subjects) const;
  std::vector<int> labels() const;
};

inline constexpr std::uint8_t kCacheVersion = 1;

/// Serialised payloads are float32, so values are rounded once on write and
/// every later write/read cycle is the identity on bytes.
std::string encode_cache(const FeatureDataset& ds);
FeatureDataset decode_cache(std::string_view bytes);
void write_cache(const FeatureDataset& ds, const std::filesystem::path& path);
FeatureDataset read_cache(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Evaluation

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Confusion confusion;
};

Metrics compute_metrics(std::span<const int> preds, std::span<const int> labels);
nlohmann::json metrics_to_json(const Metrics& m);

/// Majority vote of probs >= 0.5; ties go to 1.
int aggregate_subject(std::span<const double> probs);

struct SubjectPrediction {
  std::string subject_id;
  int label = 0;
  int predicted = 0;
  std::size_t segments = 0;
};

/// One entry per subject in order of first appearance.
std::vector<SubjectPrediction> aggregate_subjects(std::span<const SegmentRecord> records,
                                                  std::span<const double> probs);

struct AnnotationSpan {
  double start_s = 0.0;
  double end_s = 0.0;
  int label = 0;
  double probability = 0.0;
};

struct AnnotationDoc {
  std::string recording_id;
  std::vector<AnnotationSpan> spans;
};

struct TimedPrediction {
  double start_s = 0.0;
  double probability = 0.0;
};

/// Each prediction covers [start, start + segment_seconds). Touching spans
/// with the same label merge; the merged probability is the mean.
AnnotationDoc annotate(std::string recording_id, std::span<const TimedPrediction> preds,
                       double segment_seconds);

nlohmann::json annotation_to_json(const AnnotationDoc& doc);
/// Horizontal strip, green for label 0 and red for label 1.
std::string annotation_svg(const AnnotationDoc& doc);

// ---------------------------------------------------------------------------
// Export

enum class Axis { F, T };

/// subject_id,label,kind,axis,v0..vN with one row per segment.
std::string vectors_csv(const FeatureDataset& ds, Axis axis);
void export_vectors(const FeatureDataset& ds, Axis axis, const std::filesystem::path& path);

}  // namespace vocalscreen
