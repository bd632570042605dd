// src/manifest.cpp

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

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include "vocalscreen/dataset.hpp"
#include "vocalscreen/error.hpp"
#include "vocalscreen/io_util.hpp"

namespace vocalscreen {

namespace fs = std::filesystem;
using nlohmann::json;

const SubjectRecord* Manifest::find(std::string_view id) const {
  for (const auto& s : subjects) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::size_t Manifest::recording_count() const {
  std::size_t n = 0;
  for (const auto& s : subjects) n += s.recordings.size();
  return n;
}

fs::path Manifest::resolve(const RecordingRef& rec) const {
  if (rec.path.is_absolute() || base_dir.empty()) return rec.path;
  return base_dir / rec.path;
}

void validate(const Manifest& m) {
  std::unordered_set<std::string> seen;
  for (const auto& s : m.subjects) {
    if (!seen.insert(s.id).second) {
      throw Error(Errc::DuplicateSubject, "duplicate subject id '" + s.id + "'");
    }
    if (s.label != 0 && s.label != 1) {
      throw Error(Errc::InvalidLabel,
                  "subject '" + s.id + "' has label " + std::to_string(s.label));
    }
    if (s.recordings.empty()) {
      throw Error(Errc::MissingRecording, "subject '" + s.id + "' has no recordings");
    }
    for (const auto& r : s.recordings) {
      if (r.recording_id.empty() || r.path.empty()) {
        throw Error(Errc::MissingRecording,
                    "subject '" + s.id + "' has a recording without id or path");
      }
    }
  }
}

namespace {

Sex parse_sex(const json& j, const std::string& subject) {
  const std::string s = j.get<std::string>();
  if (s == "M" || s == "m") return Sex::M;
  if (s == "F" || s == "f") return Sex::F;
  throw Error(Errc::InvalidArgument, "subject '" + subject + "' has sex '" + s + "'");
}

}  // namespace

Manifest manifest_from_json(const json& j, const fs::path& base_dir) {
  Manifest m;
  m.base_dir = base_dir;
  try {
    m.dataset_name = j.value("dataset_name", std::string());
    for (const auto& js : j.at("subjects")) {
      SubjectRecord s;
      s.id = js.at("id").get<std::string>();
      s.label = js.at("label").get<int>();
      s.sex = parse_sex(js.at("sex"), s.id);
      if (js.contains("age") && !js["age"].is_null()) s.age = js["age"].get<int>();
      if (js.contains("recordings")) {
        for (const auto& jr : js["recordings"]) {
          s.recordings.push_back({jr.value("recording_id", std::string()),
                                  fs::path(jr.value("path", std::string()))});
        }
      }
      m.subjects.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("malformed manifest: ") + e.what());
  }
  validate(m);
  return m;
}

json manifest_to_json(const Manifest& m) {
  json subjects = json::array();
  for (const auto& s : m.subjects) {
    json js{{"id", s.id}, {"label", s.label}, {"sex", s.sex == Sex::M ? "M" : "F"}};
    if (s.age) js["age"] = *s.age;
    json recs = json::array();
    for (const auto& r : s.recordings) {
      recs.push_back({{"recording_id", r.recording_id}, {"path", r.path.generic_string()}});
    }
    js["recordings"] = std::move(recs);
    subjects.push_back(std::move(js));
  }
  return {{"dataset_name", m.dataset_name}, {"subjects", std::move(subjects)}};
}

Manifest load_manifest(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, "cannot parse " + path.string() + ": " + e.what());
  }
  return manifest_from_json(j, path.parent_path());
}

void save_manifest(const Manifest& m, const fs::path& path) {
  write_file_atomic(path, manifest_to_json(m).dump(2) + "\n");
}

// ---------------------------------------------------------------------------

namespace {

using Ids = std::vector<std::string>;

Ids ids_where(const Manifest& m, int label, Sex sex) {
  Ids out;
  for (const auto& s : m.subjects) {
    if (s.label == label && s.sex == sex) out.push_back(s.id);
  }
  return out;
}

SplitPlan finish(const Manifest& m, const std::set<std::string>& test, std::uint64_t seed,
                 std::string policy) {
  SplitPlan plan;
  plan.seed = seed;
  plan.policy = std::move(policy);
  for (const auto& s : m.subjects) {
    (test.count(s.id) ? plan.test_subject_ids : plan.train_subject_ids).push_back(s.id);
  }
  return plan;
}

SplitPlan split_paper_modma(const Manifest& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::set<std::string> test;
  for (int label : {0, 1}) {
    for (auto [sex, want] : {std::pair{Sex::M, 3u}, std::pair{Sex::F, 2u}}) {
      Ids pool = ids_where(m, label, sex);
      if (pool.size() < want) {
        throw Error(Errc::InfeasibleComposition,
                    "need " + std::to_string(want) + (sex == Sex::M ? " male" : " female") +
                        " subjects with label " + std::to_string(label) + ", manifest has " +
                        std::to_string(pool.size()));
      }
      std::shuffle(pool.begin(), pool.end(), rng);
      test.insert(pool.begin(), pool.begin() + want);
    }
  }
  if (test.size() == m.subjects.size()) {
    throw Error(Errc::InfeasibleComposition, "no subjects left for training");
  }
  return finish(m, test, seed, "paper_modma");
}

SplitPlan split_stratified(const Manifest& m, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(Errc::InvalidArgument, "test fraction must lie in (0, 1)");
  }
  std::mt19937_64 rng(seed);
  std::set<std::string> test;
  for (int label : {0, 1}) {
    Ids male = ids_where(m, label, Sex::M);
    Ids female = ids_where(m, label, Sex::F);
    const std::size_t n = male.size() + female.size();
    if (n == 0) continue;
    auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (n >= 2) n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
    auto n_male = static_cast<std::size_t>(
        std::llround(static_cast<double>(n_test * male.size()) / static_cast<double>(n)));
    n_male = std::min(n_male, male.size());
    std::size_t n_female = n_test - n_male;
    if (n_female > female.size()) {
      n_male += n_female - female.size();
      n_female = female.size();
    }
    std::shuffle(male.begin(), male.end(), rng);
    std::shuffle(female.begin(), female.end(), rng);
    test.insert(male.begin(), male.begin() + static_cast<std::ptrdiff_t>(n_male));
    test.insert(female.begin(), female.begin() + static_cast<std::ptrdiff_t>(n_female));
  }
  if (test.empty() || test.size() == m.subjects.size()) {
    throw Error(Errc::InfeasibleComposition, "split leaves train or test empty");
  }
  return finish(m, test, seed, "stratified");
}

}  // namespace

SplitPlan split_subjects(const Manifest& m, const SplitPolicy& policy, std::uint64_t seed) {
  validate(m);
  return policy.kind == SplitPolicy::Kind::PaperModma
             ? split_paper_modma(m, seed)
             : split_stratified(m, policy.test_fraction, seed);
}

json split_to_json(const SplitPlan& plan) {
  return {{"policy", plan.policy},
          {"seed", plan.seed},
          {"train", plan.train_subject_ids},
          {"test", plan.test_subject_ids}};
}

SplitPlan split_from_json(const json& j) {
  SplitPlan plan;
  try {
    plan.policy = j.value("policy", std::string());
    plan.seed = j.value("seed", std::uint64_t{0});
    plan.train_subject_ids = j.at("train").get<Ids>();
    plan.test_subject_ids = j.at("test").get<Ids>();
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("malformed split: ") + e.what());
  }
  std::set<std::string> train(plan.train_subject_ids.begin(), plan.train_subject_ids.end());
  for (const auto& id : plan.test_subject_ids) {
    if (train.count(id)) throw Error(Errc::InvalidArgument, "subject '" + id + "' in both sets");
  }
  return plan;
}

}  // namespace vocalscreen
