// tests/dataset_test.cpp

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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "test_util.hpp"
#include "vocalscreen/dataset.hpp"
#include "vocalscreen/io_util.hpp"
#include "vocalscreen/pipeline.hpp"

using namespace vocalscreen;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// 52 subjects with 23 depressed and 29 recordings each. Sexes chosen so
/// both labels have enough of each for the 3M/2F test draw.
json modma_like_json() {
  json subjects = json::array();
  for (int i = 0; i < 52; ++i) {
    json recs = json::array();
    for (int r = 0; r < 29; ++r) {
      recs.push_back({{"recording_id", "r" + std::to_string(r)},
                      {"path", "audio/" + std::to_string(i) + "_" + std::to_string(r) + ".wav"}});
    }
    subjects.push_back({{"id", "sub" + std::to_string(i)},
                        {"label", i < 23 ? 1 : 0},
                        {"sex", i % 3 == 0 ? "F" : "M"},
                        {"age", 20 + i},
                        {"recordings", recs}});
  }
  return {{"dataset_name", "modma"}, {"subjects", subjects}};
}

Manifest small_manifest(int n_dep, int n_norm) {
  Manifest m;
  int k = 0;
  for (int label : {1, 0}) {
    for (int i = 0; i < (label ? n_dep : n_norm); ++i, ++k) {
      m.subjects.push_back({"s" + std::to_string(k), label, k % 2 ? Sex::F : Sex::M, std::nullopt,
                            {{"r0", "x.wav"}}});
    }
  }
  return m;
}

FeatureDataset random_dataset(std::size_t n, FeatureKind kind, std::size_t rows, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 5.0);
  FeatureDataset ds;
  ds.kind = kind;
  ds.rows = rows;
  ds.cols = 64;
  for (std::size_t i = 0; i < n; ++i) {
    ds.records.push_back({"subj" + std::to_string(i % 7), "rec" + std::to_string(i % 3), i,
                          g(rng) * g(rng), static_cast<int>(i % 2)});
    FeatureMatrix m(kind, rows, 64);
    for (double& v : m.data) v = g(rng);
    ds.matrices.push_back(std::move(m));
  }
  return ds;
}

/// Autocorrelation pitch estimate over a mid-recording voiced window.
double estimate_f0(const AudioClip& clip) {
  const AudioClip voiced = voiced_stream(clip, PreprocessConfig{});
  const std::size_t n = 4096;
  const std::size_t start = voiced.samples.size() / 2;
  const int min_lag = 16000 / 300, max_lag = 16000 / 70;
  std::vector<double> r(max_lag + 1, 0.0);
  for (int lag = 0; lag <= max_lag; ++lag) {
    for (std::size_t i = 0; i < n; ++i) r[lag] += voiced.samples[start + i] * voiced.samples[start + i + lag];
  }
  double best = 0.0;
  for (int lag = min_lag; lag <= max_lag; ++lag) best = std::max(best, r[lag]);
  for (int lag = min_lag; lag < max_lag; ++lag) {
    if (r[lag] >= 0.9 * best && r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1]) return 16000.0 / lag;
  }
  return 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifest

TEST(Manifest, ModmaShapedCountsRecordings) {
  const Manifest m = manifest_from_json(modma_like_json());
  EXPECT_EQ(m.subjects.size(), 52u);
  EXPECT_EQ(m.recording_count(), 1508u);
  int depressed = 0;
  for (const auto& s : m.subjects) depressed += s.label;
  EXPECT_EQ(depressed, 23);
  ASSERT_NE(m.find("sub5"), nullptr);
  EXPECT_EQ(*m.find("sub5")->age, 25);
}

TEST(Manifest, RejectsInvalidSubjects) {
  json j = modma_like_json();
  j["subjects"][3]["id"] = "sub0";
  testutil::expect_errc(Errc::DuplicateSubject, [&] { manifest_from_json(j); });

  j = modma_like_json();
  j["subjects"][7]["label"] = 2;
  testutil::expect_errc(Errc::InvalidLabel, [&] { manifest_from_json(j); });

  j = modma_like_json();
  j["subjects"][1]["recordings"] = json::array();
  testutil::expect_errc(Errc::MissingRecording, [&] { manifest_from_json(j); });

  j = modma_like_json();
  j["subjects"][1].erase("recordings");
  testutil::expect_errc(Errc::MissingRecording, [&] { manifest_from_json(j); });

  j = modma_like_json();
  j["subjects"][1]["recordings"][0]["path"] = "";
  testutil::expect_errc(Errc::MissingRecording, [&] { manifest_from_json(j); });

  j = modma_like_json();
  j["subjects"][1]["sex"] = "X";
  testutil::expect_errc(Errc::InvalidArgument, [&] { manifest_from_json(j); });
}

TEST(Manifest, SaveLoadResolvesRelativePaths) {
  testutil::TempDir dir;
  Manifest m = manifest_from_json(modma_like_json());
  m.subjects[0].recordings[0].path = "/abs/file.wav";
  save_manifest(m, dir.path() / "sub" / "manifest.json");
  const Manifest back = load_manifest(dir.path() / "sub" / "manifest.json");
  EXPECT_EQ(manifest_to_json(back), manifest_to_json(m));
  EXPECT_EQ(back.resolve(back.subjects[0].recordings[0]), fs::path("/abs/file.wav"));
  EXPECT_EQ(back.resolve(back.subjects[1].recordings[2]), dir.path() / "sub" / "audio/1_2.wav");
}

TEST(Manifest, UnparseableFileIsInvalidArgument) {
  testutil::TempDir dir;
  write_file_atomic(dir.path() / "m.json", "{not json");
  testutil::expect_errc(Errc::InvalidArgument, [&] { load_manifest(dir.path() / "m.json"); });
  testutil::expect_errc(Errc::IoError, [&] { load_manifest(dir.path() / "missing.json"); });
}

// ---------------------------------------------------------------------------
// Split

TEST(Split, PaperModmaComposition) {
  const Manifest m = manifest_from_json(modma_like_json());
  for (std::uint64_t seed : {0u, 1u, 42u}) {
    const SplitPlan plan = split_subjects(m, SplitPolicy::paper_modma(), seed);
    EXPECT_EQ(plan.train_subject_ids.size(), 42u);
    ASSERT_EQ(plan.test_subject_ids.size(), 10u);
    std::map<std::pair<int, Sex>, int> comp;
    for (const auto& id : plan.test_subject_ids) {
      const auto* s = m.find(id);
      comp[{s->label, s->sex}]++;
    }
    EXPECT_EQ((comp[{0, Sex::M}]), 3);
    EXPECT_EQ((comp[{0, Sex::F}]), 2);
    EXPECT_EQ((comp[{1, Sex::M}]), 3);
    EXPECT_EQ((comp[{1, Sex::F}]), 2);
  }
}

TEST(Split, PaperModmaInfeasible) {
  testutil::expect_errc(Errc::InfeasibleComposition, [] {
    split_subjects(small_manifest(4, 20), SplitPolicy::paper_modma(), 1);
  });
}

TEST(Split, DisjointAndCompleteOverManySeeds) {
  const Manifest modma = manifest_from_json(modma_like_json());
  Manifest synth_m;
  for (const auto& v : synth_voices(40, 7)) {
    synth_m.subjects.push_back({v.subject_id, v.label, v.sex, std::nullopt, {{"r", "p"}}});
  }
  const Manifest& synth = synth_m;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    for (const auto& [m, policy] :
         {std::pair{&modma, SplitPolicy::paper_modma()}, std::pair{&synth, SplitPolicy::stratified(0.25)}}) {
      const SplitPlan plan = split_subjects(*m, policy, seed);
      std::set<std::string> train(plan.train_subject_ids.begin(), plan.train_subject_ids.end());
      for (const auto& id : plan.test_subject_ids) ASSERT_EQ(train.count(id), 0u) << id;
      ASSERT_EQ(plan.train_subject_ids.size() + plan.test_subject_ids.size(), m->subjects.size());
    }
  }
}

TEST(Split, StratifiedPreservesLabelAndSexProportions) {
  Manifest m;
  for (const auto& v : synth_voices(40, 7)) {
    m.subjects.push_back({v.subject_id, v.label, v.sex, std::nullopt, {{"r", "p"}}});
  }
  const SplitPlan plan = split_subjects(m, SplitPolicy::stratified(0.25), 3);
  ASSERT_EQ(plan.test_subject_ids.size(), 10u);
  std::map<std::pair<int, Sex>, int> comp;
  for (const auto& id : plan.test_subject_ids) {
    const auto* s = m.find(id);
    comp[{s->label, s->sex}]++;
  }
  EXPECT_EQ((comp[{0, Sex::M}] + comp[{0, Sex::F}]), 5);
  EXPECT_EQ((comp[{1, Sex::M}] + comp[{1, Sex::F}]), 5);
  for (auto [key, count] : comp) EXPECT_GE(count, 2);
}

TEST(Split, DeterministicPerSeedAndVariesAcrossSeeds) {
  const Manifest m = manifest_from_json(modma_like_json());
  const auto a = split_subjects(m, SplitPolicy::stratified(0.2), 5);
  const auto b = split_subjects(m, SplitPolicy::stratified(0.2), 5);
  EXPECT_EQ(a.test_subject_ids, b.test_subject_ids);
  bool differs = false;
  for (std::uint64_t s = 6; s < 20 && !differs; ++s) {
    differs = split_subjects(m, SplitPolicy::stratified(0.2), s).test_subject_ids != a.test_subject_ids;
  }
  EXPECT_TRUE(differs);
}

TEST(Split, JsonRoundTripAndBadFraction) {
  const Manifest m = manifest_from_json(modma_like_json());
  const auto plan = split_subjects(m, SplitPolicy::paper_modma(), 9);
  const auto back = split_from_json(split_to_json(plan));
  EXPECT_EQ(back.train_subject_ids, plan.train_subject_ids);
  EXPECT_EQ(back.test_subject_ids, plan.test_subject_ids);
  EXPECT_EQ(back.seed, 9u);
  testutil::expect_errc(Errc::InvalidArgument,
                        [&] { split_subjects(m, SplitPolicy::stratified(1.0), 0); });
  json overlap = split_to_json(plan);
  overlap["test"].push_back(plan.train_subject_ids[0]);
  testutil::expect_errc(Errc::InvalidArgument, [&] { split_from_json(overlap); });
}

// ---------------------------------------------------------------------------
// Synthetic corpus

TEST(Synth, CorpusOnDisk) {
  testutil::TempDir dir;
  const Manifest m = synth_corpus(40, 7, dir.path());
  ASSERT_EQ(m.subjects.size(), 40u);
  int ones = 0;
  for (const auto& s : m.subjects) ones += s.label;
  EXPECT_EQ(ones, 20);
  std::size_t wavs = 0;
  for (const auto& e : fs::directory_iterator(dir.path() / "wav")) wavs += e.path().extension() == ".wav";
  EXPECT_EQ(wavs, 160u);

  const Manifest back = load_manifest(dir.path() / "manifest.json");
  EXPECT_EQ(back.recording_count(), 160u);
  const AudioClip clip = load_audio(back.resolve(back.subjects[3].recordings[2]));
  EXPECT_EQ(clip.sample_rate_hz, 16000);
  EXPECT_GT(clip.duration_s(), 11.0);
  EXPECT_LT(clip.duration_s(), 13.0);
}

TEST(Synth, RejectsBadSubjectCounts) {
  testutil::expect_errc(Errc::InvalidArgument, [] { synth_voices(7, 1); });
  testutil::expect_errc(Errc::InvalidArgument, [] { synth_voices(6, 1); });
}

TEST(Synth, SameClassSubjectsHaveDifferentTimbre) {
  const auto a = synth_voice(0, 7);
  const auto b = synth_voice(2, 7);
  ASSERT_EQ(a.label, b.label);
  const std::size_t n = std::min(a.harmonics.size(), b.harmonics.size());
  double diff = 0.0;
  for (std::size_t h = 0; h < n; ++h) diff += std::abs(std::log(a.harmonics[h] / b.harmonics[h]));
  EXPECT_GT(diff / static_cast<double>(n), 0.1);
}

TEST(Synth, DeterministicForSeed) {
  const auto v = synth_voice(5, 11);
  EXPECT_EQ(render_recording(v, 1, 11).samples, render_recording(synth_voice(5, 11), 1, 11).samples);
  EXPECT_NE(render_recording(v, 1, 11).samples, render_recording(v, 2, 11).samples);
}

TEST(Synth, ClassPitchMeansDifferByMoreThan40Hz) {
  double sum[2] = {0.0, 0.0};
  int count[2] = {0, 0};
  for (std::size_t i = 0; i < 12; ++i) {
    const SynthVoice v = synth_voice(i, 7);
    const double f0 = estimate_f0(render_recording(v, 0, 7));
    // The estimator sees the intonation contour, so allow a few percent.
    EXPECT_NEAR(f0, v.f0_hz, 0.06 * v.f0_hz) << v.subject_id;
    sum[v.label] += f0;
    count[v.label]++;
  }
  EXPECT_GT(sum[0] / count[0] - sum[1] / count[1], 40.0);
}

// ---------------------------------------------------------------------------
// Cache

TEST(Cache, RoundTripIsBitExact) {
  testutil::TempDir dir;
  FeatureDataset ds = random_dataset(100, FeatureKind::Mfcc, 64, 1);
  write_cache(ds, dir.path() / "c.ftds");
  const std::string bytes = read_file(dir.path() / "c.ftds");
  const FeatureDataset back = read_cache(dir.path() / "c.ftds");
  ASSERT_EQ(back.size(), 100u);
  EXPECT_EQ(back.kind, FeatureKind::Mfcc);
  EXPECT_EQ(back.records, ds.records);
  for (std::size_t i = 0; i < 100; ++i) {
    for (std::size_t k = 0; k < back.matrices[i].data.size(); ++k) {
      const float expect = static_cast<float>(ds.matrices[i].data[k]);
      const float got = static_cast<float>(back.matrices[i].data[k]);
      ASSERT_EQ(std::memcmp(&expect, &got, sizeof(float)), 0);
    }
  }
  EXPECT_EQ(encode_cache(back), bytes);
}

TEST(Cache, HeaderLayout) {
  const FeatureDataset ds = random_dataset(3, FeatureKind::Fusion, 128, 2);
  const std::string bytes = encode_cache(ds);
  EXPECT_EQ(bytes.substr(0, 4), "FTDS");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);
  EXPECT_EQ(static_cast<unsigned char>(bytes[5]), 2);
  ByteReader in(std::string_view(bytes).substr(8));
  EXPECT_EQ(in.get<std::uint32_t>(), 128u);
  EXPECT_EQ(in.get<std::uint32_t>(), 64u);
  EXPECT_EQ(in.get<std::uint32_t>(), 3u);
  std::size_t expected = 20;
  for (const auto& r : ds.records) expected += 4 + r.encode_id().size() + 1 + 4 * 128 * 64;
  EXPECT_EQ(bytes.size(), expected);
}

TEST(Cache, CorruptionIsRejected) {
  const std::string good = encode_cache(random_dataset(4, FeatureKind::Mfcc, 64, 3));
  std::string bad = good;
  bad[1] = 'X';
  testutil::expect_errc(Errc::BadMagic, [&] { decode_cache(bad); });
  testutil::expect_errc(Errc::BadMagic, [&] { decode_cache("FT"); });
  bad = good;
  bad[4] = 2;
  testutil::expect_errc(Errc::VersionMismatch, [&] { decode_cache(bad); });
  testutil::expect_errc(Errc::TruncatedFile, [&] { decode_cache(good.substr(0, 10)); });
  testutil::expect_errc(Errc::TruncatedFile, [&] { decode_cache(good.substr(0, good.size() - 1)); });
  // Header claims a 64x64 payload that is missing.
  testutil::expect_errc(Errc::TruncatedFile, [&] { decode_cache(good.substr(0, 20 + 4 + 10)); });
}

TEST(Cache, RejectsMixedShapes) {
  FeatureDataset ds = random_dataset(2, FeatureKind::Mfcc, 64, 4);
  ds.matrices[1] = FeatureMatrix(FeatureKind::Mfcc, 32, 64);
  testutil::expect_errc(Errc::ShapeMismatch, [&] { encode_cache(ds); });
}

TEST(Cache, SegmentIdRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  for (int i = 0; i < 200; ++i) {
    const SegmentRecord r{"sub-" + std::to_string(i), "rec.x", static_cast<std::size_t>(i), u(rng), i % 2};
    EXPECT_EQ(SegmentRecord::decode_id(r.encode_id(), r.label), r);
  }
  const SegmentRecord bad{"a|b", "r", 0, 0.0, 0};
  testutil::expect_errc(Errc::InvalidArgument, [&] { bad.encode_id(); });
}

TEST(Cache, SubsetKeepsOrder) {
  const FeatureDataset ds = random_dataset(20, FeatureKind::Lpc, 64, 6);
  const FeatureDataset sub = ds.subset({"subj1", "subj3"});
  ASSERT_EQ(sub.size(), 6u);
  for (std::size_t i = 1; i < sub.size(); ++i) {
    EXPECT_LT(sub.records[i - 1].segment_index, sub.records[i].segment_index);
  }
  EXPECT_EQ(sub.matrices[0].data, ds.matrices[1].data);
}

// ---------------------------------------------------------------------------
// Evaluation

TEST(Aggregate, MajorityWithTiesToOne) {
  const std::vector<double> a{0.9, 0.8, 0.1};
  const std::vector<double> b{0.2, 0.3, 0.7, 0.6};
  const std::vector<double> c{0.2, 0.3, 0.7};
  EXPECT_EQ(aggregate_subject(a), 1);
  EXPECT_EQ(aggregate_subject(b), 1);
  EXPECT_EQ(aggregate_subject(c), 0);
  const std::vector<double> edge{0.5};
  EXPECT_EQ(aggregate_subject(edge), 1);
  testutil::expect_errc(Errc::EmptyPredictions, [] { aggregate_subject({}); });
}

TEST(Aggregate, PerSubjectRollUp) {
  const std::vector<SegmentRecord> recs{{"a", "r", 0, 0, 1}, {"b", "r", 0, 0, 0}, {"a", "r", 1, 3, 1},
                                        {"b", "r", 1, 3, 0}, {"a", "r", 2, 6, 1}};
  const std::vector<double> probs{0.9, 0.2, 0.1, 0.6, 0.7};
  const auto out = aggregate_subjects(recs, probs);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].subject_id, "a");
  EXPECT_EQ(out[0].predicted, 1);
  EXPECT_EQ(out[0].segments, 3u);
  EXPECT_EQ(out[1].predicted, 1);
  EXPECT_EQ(out[1].label, 0);
}

TEST(Metrics, HandComputedCase) {
  std::vector<int> preds, labels;
  auto add = [&](int p, int l, int n) {
    for (int i = 0; i < n; ++i) {
      preds.push_back(p);
      labels.push_back(l);
    }
  };
  add(1, 1, 3);
  add(1, 0, 1);
  add(0, 1, 2);
  add(0, 0, 4);
  const Metrics m = compute_metrics(preds, labels);
  EXPECT_DOUBLE_EQ(m.precision, 0.75);
  EXPECT_DOUBLE_EQ(m.recall, 0.6);
  EXPECT_NEAR(m.f1, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.7);
  EXPECT_EQ(m.confusion.tp, 3u);
  EXPECT_EQ(m.confusion.tn, 4u);
}

TEST(Metrics, EdgeCases) {
  const std::vector<int> y{0, 1, 1, 0};
  const Metrics perfect = compute_metrics(y, y);
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);
  const std::vector<int> zeros(4, 0);
  const Metrics neg = compute_metrics(zeros, y);
  EXPECT_EQ(neg.recall, 0.0);
  EXPECT_EQ(neg.precision, 0.0);
  EXPECT_EQ(neg.f1, 0.0);
  const std::vector<int> short_y{0, 1};
  testutil::expect_errc(Errc::LengthMismatch, [&] { compute_metrics(short_y, y); });
  const std::vector<int> two{2, 0, 0, 0};
  testutil::expect_errc(Errc::InvalidLabel, [&] { compute_metrics(two, y); });
}

TEST(Metrics, F1MatchesConfusionOverRandomCases) {
  std::mt19937_64 rng(8);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<int> p(n), l(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = coin(rng);
      l[i] = coin(rng);
    }
    const Metrics m = compute_metrics(p, l);
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      tp += p[i] && l[i];
      fp += p[i] && !l[i];
      fn += !p[i] && l[i];
    }
    const double prec = tp + fp ? double(tp) / double(tp + fp) : 0.0;
    const double rec = tp + fn ? double(tp) / double(tp + fn) : 0.0;
    if (prec + rec > 0) EXPECT_NEAR(m.f1, 2 * prec * rec / (prec + rec), 1e-12);
    else EXPECT_EQ(m.f1, 0.0);
  }
}

TEST(Annotate, AllZeroMergesIntoOneSpan) {
  const std::vector<TimedPrediction> preds{{0.0, 0.1}, {3.0, 0.2}, {6.0, 0.3}, {9.0, 0.4}};
  const AnnotationDoc doc = annotate("rec", preds, 3.0);
  ASSERT_EQ(doc.spans.size(), 1u);
  EXPECT_EQ(doc.spans[0].start_s, 0.0);
  EXPECT_EQ(doc.spans[0].end_s, 12.0);
  EXPECT_EQ(doc.spans[0].label, 0);
  EXPECT_NEAR(doc.spans[0].probability, 0.25, 1e-12);
}

TEST(Annotate, AlternatingLabelsStaySeparate) {
  const std::vector<TimedPrediction> preds{{3.0, 0.8}, {0.0, 0.1}, {6.0, 0.2}};
  const AnnotationDoc doc = annotate("rec", preds, 3.0);
  ASSERT_EQ(doc.spans.size(), 3u);
  const double starts[] = {0.0, 3.0, 6.0};
  const int labels[] = {0, 1, 0};
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(doc.spans[i].start_s, starts[i]);
    EXPECT_EQ(doc.spans[i].end_s, starts[i] + 3.0);
    EXPECT_EQ(doc.spans[i].label, labels[i]);
  }
  const json j = annotation_to_json(doc);
  EXPECT_EQ(j["spans"].size(), 3u);
  const std::string svg = annotation_svg(doc);
  EXPECT_NE(svg.find("#2ca02c"), std::string::npos);
  EXPECT_NE(svg.find("#d62728"), std::string::npos);
}

TEST(Annotate, SpansPartitionSegmentedTime) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<TimedPrediction> preds;
    for (std::size_t i = 0; i < n; ++i) {
      preds.push_back({3.0 * static_cast<double>(i), std::uniform_real_distribution<double>(0, 1)(rng)});
    }
    const AnnotationDoc doc = annotate("r", preds, 3.0);
    double covered = 0.0;
    for (std::size_t s = 0; s < doc.spans.size(); ++s) {
      covered += doc.spans[s].end_s - doc.spans[s].start_s;
      if (s > 0) {
        EXPECT_EQ(doc.spans[s].start_s, doc.spans[s - 1].end_s);
        EXPECT_NE(doc.spans[s].label, doc.spans[s - 1].label);
      }
    }
    EXPECT_NEAR(covered, 3.0 * static_cast<double>(n), 1e-9);
  }
}

TEST(ExportVectors, CsvShapeAndRoundTrip) {
  FeatureDataset ds = random_dataset(10, FeatureKind::Mfcc, 64, 9);
  const std::string csv = vectors_csv(ds, Axis::F);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 30), "subject_id,label,kind,axis,v0,");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 4u + 64u);
    EXPECT_EQ(cells[0], ds.records[rows].subject_id);
    EXPECT_EQ(cells[2], "mfcc");
    EXPECT_EQ(cells[3], "F");
    const auto fv = f_vector(ds.matrices[rows]);
    for (std::size_t k = 0; k < 64; ++k) EXPECT_NEAR(std::stod(cells[4 + k]), fv[k], 1e-6);
    ++rows;
  }
  EXPECT_EQ(rows, 10u);
  const std::string tcsv = vectors_csv(ds, Axis::T);
  EXPECT_NE(tcsv.find(",mfcc,T,"), std::string::npos);
}

// ---------------------------------------------------------------------------
// Pipeline

TEST(Pipeline, SynthFeaturesShapeContract) {
  const FeatureKind kinds[] = {FeatureKind::Mfcc, FeatureKind::Lpc, FeatureKind::Fusion};
  Manifest m;
  const auto ds = synth_features(8, 3, kinds, PreprocessConfig{}, 2, &m);
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(m.subjects.size(), 8u);
  EXPECT_GT(ds[0].size(), 8u * 4u);
  for (const auto& d : ds) {
    ASSERT_EQ(d.size(), ds[0].size());
    EXPECT_EQ(d.records, ds[0].records);
    for (const auto& mat : d.matrices) {
      ASSERT_EQ(mat.rows, d.rows);
      ASSERT_EQ(mat.cols, 64u);
    }
  }
  EXPECT_EQ(ds[2].rows, 128u);
  for (std::size_t i = 0; i < ds[0].size(); i += 7) {
    for (std::size_t c = 0; c < 64; ++c) {
      ASSERT_EQ(ds[2].matrices[i].at(3, c), ds[0].matrices[i].at(3, c));
      ASSERT_EQ(ds[2].matrices[i].at(64 + 3, c), ds[1].matrices[i].at(3, c));
    }
  }
  for (const auto& r : ds[0].records) EXPECT_EQ(r.label, m.find(r.subject_id)->label);
}

TEST(Pipeline, ThreadCountDoesNotChangeOutput) {
  const FeatureKind kinds[] = {FeatureKind::Mfcc};
  const auto one = synth_features(8, 4, kinds, PreprocessConfig{}, 1);
  const auto three = synth_features(8, 4, kinds, PreprocessConfig{}, 3);
  EXPECT_EQ(encode_cache(one[0]), encode_cache(three[0]));
}

TEST(Pipeline, ManifestMatchesInMemoryPath) {
  testutil::TempDir dir;
  const Manifest m = synth_corpus(8, 5, dir.path());
  const FeatureKind kinds[] = {FeatureKind::Mfcc};
  const auto disk = extract_manifest(load_manifest(dir.path() / "manifest.json"), kinds, PreprocessConfig{}, 1);
  const auto mem = synth_features(8, 5, kinds, PreprocessConfig{}, 1);
  ASSERT_EQ(disk[0].size(), mem[0].size());
  EXPECT_EQ(disk[0].records, mem[0].records);
  // WAV storage quantises to 16 bits, so coefficients agree only loosely.
  double max_diff = 0.0;
  for (std::size_t i = 0; i < disk[0].size(); ++i) {
    for (std::size_t k = 0; k < disk[0].matrices[i].data.size(); ++k) {
      max_diff = std::max(max_diff, std::abs(disk[0].matrices[i].data[k] - mem[0].matrices[i].data[k]));
    }
  }
  EXPECT_LT(max_diff, 1.0);
}
