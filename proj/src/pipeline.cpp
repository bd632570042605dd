// src/pipeline.cpp

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

#include "vocalscreen/pipeline.hpp"

#include "vocalscreen/error.hpp"
#include "vocalscreen/parallel.hpp"

namespace vocalscreen {

namespace {

struct ClipFeatures {
  std::vector<SegmentRecord> records;
  std::vector<FeatureMatrix> mfcc;
  std::vector<FeatureMatrix> lpc;
};

ClipFeatures process_clip(const LabeledClip& lc, bool want_mfcc, bool want_lpc,
                          const PreprocessConfig& cfg, const MelFilterbank& bank) {
  ClipFeatures out;
  const AudioClip voiced = voiced_stream(lc.clip, cfg);
  for (const Segment& seg : segments_from_voiced(voiced, cfg)) {
    const FrameMatrix frames = frame_and_window(seg, cfg);
    out.records.push_back(
        {lc.clip.subject_id, lc.clip.recording_id, seg.index, seg.start_offset_s, lc.label});
    if (want_mfcc) out.mfcc.push_back(pool_time(mfcc(frames, bank)));
    if (want_lpc) out.lpc.push_back(pool_time(lpc_features(frames, kCoefficients)));
  }
  return out;
}

}  // namespace

std::vector<FeatureDataset> extract_clips(std::span<const LabeledClip> clips,
                                          std::span<const FeatureKind> kinds,
                                          const PreprocessConfig& cfg, std::size_t jobs) {
  cfg.validate();
  bool want_mfcc = false, want_lpc = false;
  for (FeatureKind k : kinds) {
    want_mfcc |= k != FeatureKind::Lpc;
    want_lpc |= k != FeatureKind::Mfcc;
  }
  const MelFilterbank bank = build_mel_filterbank(cfg.target_rate_hz, kFftSize, kCoefficients);
  std::vector<ClipFeatures> per_clip(clips.size());
  parallel_for(clips.size(), jobs, [&](std::size_t i) {
    per_clip[i] = process_clip(clips[i], want_mfcc, want_lpc, cfg, bank);
  });

  std::vector<FeatureDataset> out;
  for (FeatureKind kind : kinds) {
    FeatureDataset ds;
    ds.kind = kind;
    ds.rows = kind == FeatureKind::Fusion ? 2 * kCoefficients : kCoefficients;
    ds.cols = kPooledColumns;
    for (const ClipFeatures& cf : per_clip) {
      for (std::size_t s = 0; s < cf.records.size(); ++s) {
        ds.records.push_back(cf.records[s]);
        switch (kind) {
          case FeatureKind::Mfcc: ds.matrices.push_back(cf.mfcc[s]); break;
          case FeatureKind::Lpc: ds.matrices.push_back(cf.lpc[s]); break;
          case FeatureKind::Fusion: ds.matrices.push_back(fuse(cf.mfcc[s], cf.lpc[s])); break;
        }
      }
    }
    out.push_back(std::move(ds));
  }
  return out;
}

FeatureDataset extract_clips(std::span<const LabeledClip> clips, FeatureKind kind,
                             const PreprocessConfig& cfg, std::size_t jobs) {
  const FeatureKind kinds[] = {kind};
  return std::move(extract_clips(clips, kinds, cfg, jobs).front());
}

std::vector<FeatureDataset> extract_manifest(const Manifest& m, std::span<const FeatureKind> kinds,
                                             const PreprocessConfig& cfg, std::size_t jobs) {
  validate(m);
  std::vector<std::pair<const SubjectRecord*, const RecordingRef*>> refs;
  for (const auto& s : m.subjects) {
    for (const auto& r : s.recordings) refs.emplace_back(&s, &r);
  }
  std::vector<LabeledClip> clips(refs.size());
  parallel_for(refs.size(), jobs, [&](std::size_t i) {
    clips[i].clip = load_audio(m.resolve(*refs[i].second));
    clips[i].clip.subject_id = refs[i].first->id;
    clips[i].clip.recording_id = refs[i].second->recording_id;
    clips[i].label = refs[i].first->label;
  });
  return extract_clips(clips, kinds, cfg, jobs);
}

std::vector<FeatureDataset> synth_features(std::size_t n_subjects, std::uint64_t seed,
                                           std::span<const FeatureKind> kinds,
                                           const PreprocessConfig& cfg, std::size_t jobs,
                                           Manifest* manifest) {
  const auto voices = synth_voices(n_subjects, seed);
  std::vector<LabeledClip> clips(voices.size() * kSynthRecordings);
  parallel_for(clips.size(), jobs, [&](std::size_t i) {
    const SynthVoice& v = voices[i / kSynthRecordings];
    clips[i].clip = render_recording(v, i % kSynthRecordings, seed);
    clips[i].label = v.label;
  });
  if (manifest) {
    manifest->dataset_name = "synthetic";
    manifest->subjects.clear();
    for (const SynthVoice& v : voices) {
      SubjectRecord s{v.subject_id, v.label, v.sex, std::nullopt, {}};
      for (std::size_t r = 0; r < kSynthRecordings; ++r) {
        const std::string rid = v.subject_id + "_r" + std::to_string(r);
        s.recordings.push_back({rid, "wav/" + rid + ".wav"});
      }
      manifest->subjects.push_back(std::move(s));
    }
  }
  return extract_clips(clips, kinds, cfg, jobs);
}

void quantize(FeatureDataset& ds) {
  for (auto& m : ds.matrices) {
    for (double& v : m.data) v = static_cast<float>(v);
  }
}

}  // namespace vocalscreen
