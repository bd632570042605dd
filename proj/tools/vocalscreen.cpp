// tools/vocalscreen.cpp

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

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vocalscreen/augment.hpp"
#include "vocalscreen/dataset.hpp"
#include "vocalscreen/error.hpp"
#include "vocalscreen/forest.hpp"
#include "vocalscreen/io_util.hpp"
#include "vocalscreen/nn/experiment.hpp"
#include "vocalscreen/parallel.hpp"
#include "vocalscreen/pipeline.hpp"
#include "vocalscreen/preprocess.hpp"
#include "vocalscreen/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vocalscreen;

namespace {

enum class Kind { Uint, Real, Str, Bool, UintList, UintLists, StrList };

/// A command-line flag bound to a location in the merged config.
struct Flag {
  std::string pointer;
  Kind kind;
  std::string text;
  bool on = false;
  CLI::Option* option = nullptr;
};

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  std::string config_path;
  bool randomized = false;
  std::vector<std::unique_ptr<Flag>> flags;
  std::function<void(const json&)> run;

  void add(const std::string& names, const std::string& pointer, Kind kind, const std::string& help) {
    auto f = std::make_unique<Flag>();
    f->pointer = pointer;
    f->kind = kind;
    f->option = kind == Kind::Bool ? app->add_flag(names, f->on, help) : app->add_option(names, f->text, help);
    flags.push_back(std::move(f));
  }
};

[[noreturn]] void bad(const std::string& msg) { throw Error(Errc::InvalidArgument, msg); }

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::uint64_t to_uint(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (s.empty() || s[0] == '-') throw std::invalid_argument("");
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    bad("'" + s + "' is not a non-negative integer");
  }
  if (used != s.size()) bad("'" + s + "' is not a non-negative integer");
  return v;
}

json uint_list(const std::string& s) {
  json out = json::array();
  for (const auto& part : split_on(s, ',')) out.push_back(to_uint(part));
  return out;
}

json convert(const Flag& f) {
  switch (f.kind) {
    case Kind::Uint: return to_uint(f.text);
    case Kind::Real: {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(f.text, &used);
      } catch (const std::exception&) {
        bad("'" + f.text + "' is not a number");
      }
      if (used != f.text.size()) bad("'" + f.text + "' is not a number");
      return v;
    }
    case Kind::Str: return f.text;
    case Kind::Bool: return f.on;
    case Kind::UintList: return uint_list(f.text);
    case Kind::UintLists: {
      json out = json::array();
      for (const auto& tuple : split_on(f.text, ';')) out.push_back(uint_list(tuple));
      return out;
    }
    case Kind::StrList: {
      json out = json::array();
      for (const auto& part : split_on(f.text, ',')) out.push_back(part);
      return out;
    }
  }
  return nullptr;
}

json merged_config(const Command& cmd) {
  json cfg = json::object();
  if (!cmd.config_path.empty()) {
    if (!fs::exists(cmd.config_path)) bad("config file " + cmd.config_path + " does not exist");
    try {
      cfg = json::parse(read_file(cmd.config_path));
    } catch (const json::exception& e) {
      bad("cannot parse " + cmd.config_path + ": " + e.what());
    }
    if (!cfg.is_object()) bad("config file must hold a JSON object");
  }
  for (const auto& f : cmd.flags) {
    if (f->option->count() > 0) cfg[json::json_pointer(f->pointer)] = convert(*f);
  }
  if (cmd.randomized && !cfg.contains("seed")) bad(cmd.name + " needs --seed");
  if (!cfg.contains("out")) bad(cmd.name + " needs --out");
  return cfg;
}

// ---------------------------------------------------------------------------
// Config accessors

fs::path out_dir(const json& cfg) {
  fs::path out = cfg.at("out").get<std::string>();
  fs::create_directories(out);
  return out;
}

std::uint64_t seed_of(const json& cfg) { return cfg.at("seed").get<std::uint64_t>(); }

std::size_t jobs_of(const json& cfg) { return cfg.value("jobs", default_jobs()); }

fs::path input_path(const json& cfg, const std::string& key, const std::string& flag) {
  if (!cfg.contains(key)) bad("missing " + flag);
  fs::path p = cfg.at(key).get<std::string>();
  if (!fs::exists(p)) bad(flag + " " + p.string() + " does not exist");
  return p;
}

template <class T>
T section(const json& cfg, const std::string& key) {
  return cfg.value(key, json::object()).get<T>();
}

PreprocessConfig preprocess_of(const json& cfg) {
  auto p = section<PreprocessConfig>(cfg, "preprocess");
  p.validate();
  return p;
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

void echo_config(const fs::path& out, const std::string& name, const json& cfg) {
  write_json(out / (name + ".config.json"), cfg);
}

struct Split {
  FeatureDataset train;
  FeatureDataset test;
};

Split split_cache(const json& cfg) {
  const FeatureDataset ds = read_cache(input_path(cfg, "cache", "--cache"));
  const SplitPlan plan = split_from_json(json::parse(read_file(input_path(cfg, "split_file", "--split"))));
  Split s{ds.subset({plan.train_subject_ids.begin(), plan.train_subject_ids.end()}),
          ds.subset({plan.test_subject_ids.begin(), plan.test_subject_ids.end()})};
  if (s.train.size() == 0 || s.test.size() == 0) {
    throw Error(Errc::EmptySplit, "split leaves no cached segments on one side");
  }
  return s;
}

nn::Experiment experiment_of(const json& cfg) {
  nn::Experiment e;
  if (cfg.contains("model")) e.spec = nn::spec_from_json(cfg["model"]);
  e.train = section<nn::TrainConfig>(cfg, "train");
  if (cfg.contains("seed")) e.train.seed = seed_of(cfg);
  e.train.validate();
  e.mask = parse_mask_mode(cfg.value("mask_mode", std::string("none")));
  e.mask_cfg = section<MaskConfig>(cfg, "mask");
  e.occlude_test = cfg.value("occlude", false);
  return e;
}

json evaluation_json(const nn::Evaluation& ev) {
  json subjects = json::array();
  for (const auto& s : ev.subjects) {
    subjects.push_back({{"subject_id", s.subject_id},
                        {"label", s.label},
                        {"predicted", s.predicted},
                        {"segments", s.segments}});
  }
  return {{"segment", metrics_to_json(ev.segment)},
          {"subject", metrics_to_json(ev.subject)},
          {"subjects", std::move(subjects)},
          {"probabilities", ev.probabilities}};
}

Axis axis_of(const std::string& s) {
  if (s == "f" || s == "F") return Axis::F;
  if (s == "t" || s == "T") return Axis::T;
  bad("axis must be f or t, got '" + s + "'");
}

// ---------------------------------------------------------------------------
// Commands

void run_synth(const json& cfg) {
  const fs::path out = out_dir(cfg);
  const Manifest m = synth_corpus(cfg.value("subjects", std::size_t{40}), seed_of(cfg), out);
  echo_config(out, "synth", cfg);
  std::printf("wrote %zu subjects, %zu recordings to %s\n", m.subjects.size(), m.recording_count(),
              out.string().c_str());
}

void run_preprocess(const json& cfg) {
  const Manifest m = load_manifest(input_path(cfg, "manifest", "--manifest"));
  const PreprocessConfig pc = preprocess_of(cfg);
  const fs::path out = out_dir(cfg);
  std::vector<std::pair<const SubjectRecord*, const RecordingRef*>> recs;
  for (const auto& s : m.subjects) {
    for (const auto& r : s.recordings) recs.emplace_back(&s, &r);
  }
  std::vector<json> rows(recs.size());
  parallel_for(recs.size(), jobs_of(cfg), [&](std::size_t i) {
    AudioClip clip = load_audio(m.resolve(*recs[i].second));
    const double duration = clip.duration_s();
    const AudioClip voiced = voiced_stream(clip, pc);
    json offsets = json::array();
    for (const auto& seg : segments_from_voiced(voiced, pc)) offsets.push_back(seg.start_offset_s);
    rows[i] = {{"subject_id", recs[i].first->id},
               {"recording_id", recs[i].second->recording_id},
               {"duration_s", duration},
               {"voiced_s", voiced.duration_s()},
               {"segments", offsets.size()},
               {"segment_offsets_s", std::move(offsets)}};
  });
  write_json(out / "preprocess.json", {{"recordings", rows}});
  echo_config(out, "preprocess", cfg);
  std::printf("preprocessed %zu recordings\n", rows.size());
}

void run_extract(const json& cfg) {
  const Manifest m = load_manifest(input_path(cfg, "manifest", "--manifest"));
  const PreprocessConfig pc = preprocess_of(cfg);
  std::vector<FeatureKind> kinds;
  for (const auto& k : cfg.value("features", json::array({"fusion"}))) {
    kinds.push_back(parse_feature_kind(k.get<std::string>()));
  }
  const fs::path out = out_dir(cfg);
  const auto sets = extract_manifest(m, kinds, pc, jobs_of(cfg));
  for (const auto& ds : sets) {
    const fs::path p = out / (std::string(to_string(ds.kind)) + ".ftds");
    write_cache(ds, p);
    std::printf("%s: %zu segments of %zux%zu -> %s\n", std::string(to_string(ds.kind)).c_str(), ds.size(), ds.rows,
                ds.cols, p.string().c_str());
  }
  echo_config(out, "extract", cfg);
}

void run_split(const json& cfg) {
  const Manifest m = load_manifest(input_path(cfg, "manifest", "--manifest"));
  const std::string policy = cfg.value("/split/policy"_json_pointer, std::string("stratified"));
  SplitPolicy p;
  if (policy == "paper-modma" || policy == "paper_modma") {
    p = SplitPolicy::paper_modma();
  } else if (policy == "stratified") {
    p = SplitPolicy::stratified(cfg.value("/split/test_fraction"_json_pointer, 0.2));
  } else {
    bad("unknown split policy '" + policy + "'");
  }
  const SplitPlan plan = split_subjects(m, p, seed_of(cfg));
  const fs::path out = out_dir(cfg);
  write_json(out / "split.json", split_to_json(plan));
  echo_config(out, "split", cfg);
  std::printf("train %zu subjects, test %zu subjects\n", plan.train_subject_ids.size(),
              plan.test_subject_ids.size());
}

void run_train(const json& cfg) {
  const Split s = split_cache(cfg);
  const nn::Experiment e = experiment_of(cfg);
  const fs::path out = out_dir(cfg);
  auto result = nn::run_experiment(s.train, s.test, e);
  nn::save_weights(result.model, result.stats, out / "model.json");
  json report = nn::report_to_json(result.report);
  report["experiment"] = nn::experiment_to_json(e);
  report["validation_subjects"] = result.val_subjects;
  write_json(out / "fit_report.json", report);
  echo_config(out, "train", cfg);
  std::printf("best epoch %zu of %zu; test segment accuracy %.4f, subject accuracy %.4f\n", result.report.best_epoch,
              result.report.epochs_run, result.report.test_segment.accuracy, result.report.test_subject.accuracy);
}

void run_evaluate(const json& cfg) {
  FeatureDataset ds = read_cache(input_path(cfg, "cache", "--cache"));
  if (cfg.contains("split_file")) {
    const SplitPlan plan = split_from_json(json::parse(read_file(input_path(cfg, "split_file", "--split"))));
    ds = ds.subset({plan.test_subject_ids.begin(), plan.test_subject_ids.end()});
  }
  auto loaded = nn::load_weights(input_path(cfg, "weights", "--weights"));
  const nn::Evaluation ev = nn::evaluate_dataset(loaded.model, loaded.stats, ds);
  const fs::path out = out_dir(cfg);
  write_json(out / "evaluation.json", evaluation_json(ev));
  echo_config(out, "evaluate", cfg);
  std::printf("segment accuracy %.4f f1 %.4f; subject accuracy %.4f\n", ev.segment.accuracy, ev.segment.f1,
              ev.subject.accuracy);
}

void run_grid(const json& cfg) {
  const Split s = split_cache(cfg);
  const nn::Experiment base = experiment_of(cfg);
  const json g = cfg.value("grid", json::object());
  nn::GridSpace space;
  if (g.contains("modes")) {
    space.modes.clear();
    for (const auto& m : g["modes"]) space.modes.push_back(nn::parse_mode(m.get<std::string>()));
  }
  space.layers = g.value("layers", space.layers);
  space.kernels = g.value("kernels", space.kernels);
  space.dilation_sets = g.value("dilations", space.dilation_sets);
  space.default_dilation = g.value("default_dilation", space.default_dilation);
  const auto rows = nn::grid_search(s.train, s.test, space, base, g.value("repeats", std::size_t{3}), jobs_of(cfg));
  const fs::path out = out_dir(cfg);
  write_file_atomic(out / "grid.csv", nn::grid_csv(rows));
  echo_config(out, "grid-search", cfg);
  std::printf("%zu grid rows -> %s\n", rows.size(), (out / "grid.csv").string().c_str());
}

void run_importance(const json& cfg) {
  const FeatureDataset ds = read_cache(input_path(cfg, "cache", "--cache"));
  const Axis axis = axis_of(cfg.value("axis", std::string("f")));
  ForestConfig fc = section<ForestConfig>(cfg, "forest");
  fc.seed = seed_of(cfg);
  fc.jobs = jobs_of(cfg);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> subjects;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    rows.push_back(axis == Axis::F ? f_vector(ds.matrices[i]) : t_vector(ds.matrices[i]));
    subjects.push_back(ds.records[i].subject_id);
  }
  const auto labels = ds.labels();
  const ImportanceReport r =
      kfold_importance(Samples::from_rows(rows), labels, subjects, cfg.value("folds", std::size_t{5}), fc);
  const fs::path out = out_dir(cfg);
  write_file_atomic(out / "importance.csv", importance_csv(r));
  write_json(out / "importance.json", importance_json(r));
  echo_config(out, "importance", cfg);
  std::printf("top feature %zu; fold tops:", r.ranking.front());
  for (std::size_t t : r.fold_top) std::printf(" %zu", t);
  std::printf("\n");
}

void run_ablate(const json& cfg) {
  const Split s = split_cache(cfg);
  const nn::Experiment base = experiment_of(cfg);
  const json a = cfg.value("ablation", json::object());
  std::vector<MaskMode> modes;
  for (const auto& m : a.value("modes", json::array({"none", "t", "f", "tf"}))) {
    modes.push_back(parse_mask_mode(m.get<std::string>()));
  }
  std::vector<std::uint64_t> seeds = a.value("seeds", std::vector<std::uint64_t>{});
  if (seeds.empty()) {
    const std::size_t repeats = a.value("repeats", std::size_t{3});
    for (std::size_t r = 0; r < repeats; ++r) seeds.push_back(derive_seed(seed_of(cfg), {r}));
  }
  const auto rows = nn::ablate_masks(s.train, s.test, base, modes, seeds, jobs_of(cfg));
  const fs::path out = out_dir(cfg);
  write_file_atomic(out / "ablation.csv", nn::ablation_csv(rows));
  json j = json::array();
  for (const auto& r : rows) {
    j.push_back({{"feature", to_string(r.kind)},
                 {"variant", nn::ablation_label(r.mask)},
                 {"accuracies", r.accuracies},
                 {"acc_mean", r.acc_mean},
                 {"f1_mean", r.f1_mean}});
  }
  write_json(out / "ablation.json", {{"seeds", seeds}, {"occlude_test", base.occlude_test}, {"rows", j}});
  echo_config(out, "ablate-mask", cfg);
  for (const auto& r : rows) {
    std::printf("%-9s acc %.4f +- %.4f  f1 %.4f\n", std::string(nn::ablation_label(r.mask)).c_str(), r.acc_mean,
                r.acc_std, r.f1_mean);
  }
}

std::string file_safe(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return s;
}

void run_annotate(const json& cfg) {
  const FeatureDataset ds = read_cache(input_path(cfg, "cache", "--cache"));
  auto loaded = nn::load_weights(input_path(cfg, "weights", "--weights"));
  const std::string only = cfg.value("recording", std::string());
  const double seg_s = cfg.value("/preprocess/segment_seconds"_json_pointer, 3.0);
  const nn::Evaluation ev = nn::evaluate_dataset(loaded.model, loaded.stats, ds);
  std::map<std::string, std::vector<TimedPrediction>> by_rec;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& rec = ds.records[i];
    if (!only.empty() && rec.recording_id != only) continue;
    by_rec[rec.recording_id].push_back({rec.start_offset_s, ev.probabilities[i]});
  }
  if (by_rec.empty()) bad("no cached segments for recording '" + only + "'");
  const fs::path out = out_dir(cfg);
  for (const auto& [rec, preds] : by_rec) {
    const AnnotationDoc doc = annotate(rec, preds, seg_s);
    write_json(out / ("annotation_" + file_safe(rec) + ".json"), annotation_to_json(doc));
    write_file_atomic(out / ("annotation_" + file_safe(rec) + ".svg"), annotation_svg(doc));
  }
  echo_config(out, "annotate", cfg);
  std::printf("annotated %zu recordings\n", by_rec.size());
}

void run_export(const json& cfg) {
  const FeatureDataset ds = read_cache(input_path(cfg, "cache", "--cache"));
  const std::string which = cfg.value("axis", std::string("both"));
  const fs::path out = out_dir(cfg);
  const std::string kind(to_string(ds.kind));
  if (which == "both" || which == "f") export_vectors(ds, Axis::F, out / ("vectors_" + kind + "_f.csv"));
  if (which == "both" || which == "t") export_vectors(ds, Axis::T, out / ("vectors_" + kind + "_t.csv"));
  if (which != "both") axis_of(which);
  echo_config(out, "export-vectors", cfg);
  std::printf("exported %zu vectors\n", ds.size());
}

void report_error(std::string_view code, const std::string& message) {
  std::cerr << "error code=" << code << " message=" << json(message).dump() << "\n";
}

// ---------------------------------------------------------------------------

Command& make(std::vector<std::unique_ptr<Command>>& cmds, CLI::App& app, const std::string& name,
              const std::string& help, bool randomized, std::function<void(const json&)> run) {
  auto c = std::make_unique<Command>();
  c->name = name;
  c->app = app.add_subcommand(name, help);
  c->randomized = randomized;
  c->run = std::move(run);
  c->app->add_option("--config", c->config_path, "JSON config; flags override its values");
  c->add("--out", "/out", Kind::Str, "output directory");
  c->add("--jobs", "/jobs", Kind::Uint, "worker threads (default VOCALSCREEN_JOBS or 1)");
  if (randomized) c->add("--seed", "/seed", Kind::Uint, "random seed (required)");
  cmds.push_back(std::move(c));
  return *cmds.back();
}

void model_flags(Command& c, bool architecture = true) {
  c.add("--cache", "/cache", Kind::Str, "feature cache file");
  c.add("--split", "/split_file", Kind::Str, "split JSON from the split command");
  if (architecture) {
    c.add("--mode", "/model/mode", Kind::Str, "pure-1d-f|pure-1d-t|mix-1df-2d|mix-1dt-2d|pure-2d|rsenet");
    c.add("--layers", "/model/n_layers", Kind::Uint, "2, 4 or 6");
    c.add("--kernel", "/model/kernel", Kind::Uint, "3, 5 or 7");
    c.add("--dilations", "/model/dilations", Kind::UintList, "per-layer dilations, e.g. 2,2,2,3");
  }
  c.add("--widths", "/model/widths", Kind::UintList, "per-layer channel widths");
  c.add("--epochs", "/train/max_epochs", Kind::Uint, "maximum epochs");
  c.add("--lr", "/train/learning_rate", Kind::Real, "Adam learning rate");
  c.add("--batch", "/train/batch_size", Kind::Uint, "mini-batch size");
  c.add("--patience", "/train/patience", Kind::Uint, "early-stop patience in epochs");
  c.add("--val-fraction", "/train/val_fraction", Kind::Real, "share of train subjects held out");
  c.add("--mask", "/mask_mode", Kind::Str, "none|t|f|tf training-time masking");
  c.add("--mask-f-width", "/mask/max_f_width", Kind::Uint, "max masked rows");
  c.add("--mask-t-width", "/mask/max_t_width", Kind::Uint, "max masked columns");
  c.add("--masks-per-axis", "/mask/masks_per_axis", Kind::Uint, "masks drawn per axis");
  c.add("--occlude", "/occlude", Kind::Bool, "also mask test inputs (occlusion reading)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voice-based depression screening pipeline"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Command>> cmds;

  auto& synth = make(cmds, app, "synth", "render the synthetic corpus", true, run_synth);
  synth.add("--subjects", "/subjects", Kind::Uint, "even subject count >= 8");

  auto& pre = make(cmds, app, "preprocess", "voiced-stream and segmentation summary", false, run_preprocess);
  pre.add("--manifest", "/manifest", Kind::Str, "manifest JSON");

  auto& ext = make(cmds, app, "extract", "extract feature caches", false, run_extract);
  ext.add("--manifest", "/manifest", Kind::Str, "manifest JSON");
  ext.add("--feature", "/features", Kind::StrList, "mfcc,lpc,fusion (comma separated)");

  auto& spl = make(cmds, app, "split", "subject-disjoint train/test split", true, run_split);
  spl.add("--manifest", "/manifest", Kind::Str, "manifest JSON");
  spl.add("--policy", "/split/policy", Kind::Str, "stratified|paper-modma");
  spl.add("--test-fraction", "/split/test_fraction", Kind::Real, "stratified test share");

  model_flags(make(cmds, app, "train", "train one model and score the test subjects", true, run_train));

  auto& ev = make(cmds, app, "evaluate", "score a saved model", false, run_evaluate);
  ev.add("--cache", "/cache", Kind::Str, "feature cache file");
  ev.add("--weights", "/weights", Kind::Str, "model.json from train");
  ev.add("--split", "/split_file", Kind::Str, "restrict to the split's test subjects");

  auto& grid = make(cmds, app, "grid-search", "architecture grid", true, run_grid);
  model_flags(grid, false);
  grid.add("--modes", "/grid/modes", Kind::StrList, "modes, comma separated");
  grid.add("--layers", "/grid/layers", Kind::UintList, "layer counts when no dilation tuples are given");
  grid.add("--kernels", "/grid/kernels", Kind::UintList, "kernel sizes");
  grid.add("--dilations", "/grid/dilations", Kind::UintLists, "tuples, e.g. \"2,2,2,2;2,2,2,3\"");
  grid.add("--repeats", "/grid/repeats", Kind::Uint, "seeds per cell");

  auto& imp = make(cmds, app, "importance", "k-fold random-forest importance", true, run_importance);
  imp.add("--cache", "/cache", Kind::Str, "feature cache file");
  imp.add("--folds", "/folds", Kind::Uint, "subject folds");
  imp.add("--axis", "/axis", Kind::Str, "f (per coefficient) or t (per frame)");
  imp.add("--trees", "/forest/n_trees", Kind::Uint, "trees per forest");

  auto& abl = make(cmds, app, "ablate-mask", "masking ablation", true, run_ablate);
  model_flags(abl);
  abl.add("--repeats", "/ablation/repeats", Kind::Uint, "seeds derived from --seed");
  abl.add("--seeds", "/ablation/seeds", Kind::UintList, "explicit seeds");
  abl.add("--variants", "/ablation/modes", Kind::StrList, "mask modes, default none,t,f,tf");

  auto& ann = make(cmds, app, "annotate", "segment timeline annotation", false, run_annotate);
  ann.add("--cache", "/cache", Kind::Str, "feature cache file");
  ann.add("--weights", "/weights", Kind::Str, "model.json from train");
  ann.add("--recording", "/recording", Kind::Str, "one recording id (default all)");

  auto& exp = make(cmds, app, "export-vectors", "F-/T-vector CSV export", false, run_export);
  exp.add("--cache", "/cache", Kind::Str, "feature cache file");
  exp.add("--axis", "/axis", Kind::Str, "f, t or both");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("InvalidArgument", e.what());
    return 2;
  }

  for (const auto& c : cmds) {
    if (!c->app->parsed()) continue;
    try {
      c->run(merged_config(*c));
      return 0;
    } catch (const Error& e) {
      report_error(errc_name(e.code()), e.what());
      return is_validation_error(e.code()) ? 2 : 3;
    } catch (const json::exception& e) {
      report_error("InvalidArgument", e.what());
      return 2;
    } catch (const fs::filesystem_error& e) {
      report_error("IoError", e.what());
      return 3;
    } catch (const std::exception& e) {
      report_error("Internal", e.what());
      return 3;
    }
  }
  return 2;
}
