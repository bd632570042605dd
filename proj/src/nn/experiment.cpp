// src/nn/experiment.cpp

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

#include "vocalscreen/nn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <random>

#include "vocalscreen/error.hpp"
#include "vocalscreen/io_util.hpp"
#include "vocalscreen/parallel.hpp"
#include "vocalscreen/rng.hpp"

namespace vocalscreen::nn {

namespace fs = std::filesystem;
using nlohmann::json;

Standardizer Standardizer::fit(const Tensor& x) {
  if (x.batch() == 0) throw Error(Errc::EmptySplit, "cannot fit input statistics on no samples");
  const std::size_t per = x.sample_size();
  const auto n = static_cast<double>(x.batch());
  Standardizer s;
  s.mean.assign(per, 0.0);
  s.scale.assign(per, 0.0);
  for (std::size_t i = 0; i < x.batch(); ++i) {
    const double* v = x.sample(i);
    for (std::size_t k = 0; k < per; ++k) s.mean[k] += v[k];
  }
  for (double& m : s.mean) m /= n;
  for (std::size_t i = 0; i < x.batch(); ++i) {
    const double* v = x.sample(i);
    for (std::size_t k = 0; k < per; ++k) s.scale[k] += (v[k] - s.mean[k]) * (v[k] - s.mean[k]);
  }
  for (double& sc : s.scale) {
    sc = std::sqrt(sc / n);
    if (!(sc > 1e-12)) sc = 1.0;
  }
  return s;
}

void Standardizer::apply(Tensor& x) const {
  const std::size_t per = x.sample_size();
  if (x.batch() == 0) return;
  if (per != mean.size()) {
    throw Error(Errc::ShapeMismatch, "input statistics cover " + std::to_string(mean.size()) +
                                         " values, samples have " + std::to_string(per));
  }
  for (std::size_t i = 0; i < x.batch(); ++i) {
    double* v = x.sample(i);
    for (std::size_t k = 0; k < per; ++k) v[k] = (v[k] - mean[k]) / scale[k];
  }
}

json standardizer_to_json(const Standardizer& s) { return {{"mean", s.mean}, {"scale", s.scale}}; }

Standardizer standardizer_from_json(const json& j) {
  Standardizer s;
  try {
    s.mean = j.at("mean").get<std::vector<double>>();
    s.scale = j.at("scale").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("malformed input statistics: ") + e.what());
  }
  if (s.mean.size() != s.scale.size()) throw Error(Errc::ShapeMismatch, "mean and scale differ in length");
  return s;
}

LabeledTensor to_tensor(const FeatureDataset& ds, const ModelSpec& spec) {
  const Shape in = spec.input_shape();
  LabeledTensor out;
  out.records = ds.records;
  out.y = ds.labels();
  if (spec.convolutional()) {
    if (spec.in_channels != 1 || ds.rows != spec.in_f || ds.cols != spec.in_t) {
      throw Error(Errc::ShapeMismatch, "dataset is " + std::to_string(ds.rows) + "x" + std::to_string(ds.cols) +
                                           ", model expects " + shape_str(in));
    }
  } else if (ds.rows != spec.in_f) {
    throw Error(Errc::ShapeMismatch, "dataset has " + std::to_string(ds.rows) + " rows, model expects " +
                                         shape_str(in));
  }
  Shape s{ds.size()};
  s.insert(s.end(), in.begin(), in.end());
  out.x = Tensor(s);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (spec.convolutional()) {
      std::copy(ds.matrices[i].data.begin(), ds.matrices[i].data.end(), out.x.sample(i));
    } else {
      const auto v = f_vector(ds.matrices[i]);
      std::copy(v.begin(), v.end(), out.x.sample(i));
    }
  }
  return out;
}

std::set<std::string> carve_validation(std::span<const SegmentRecord> records, double fraction,
                                       std::uint64_t seed) {
  std::map<std::string, int> label_of;
  for (const auto& r : records) label_of.emplace(r.subject_id, r.label);
  std::mt19937_64 rng(seed);
  std::set<std::string> out;
  for (int label : {0, 1}) {
    std::vector<std::string> ids;
    for (const auto& [id, l] : label_of) {
      if (l == label) ids.push_back(id);
    }
    if (ids.size() < 2) continue;
    auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size())));
    take = std::clamp<std::size_t>(take, 1, ids.size() - 1);
    std::shuffle(ids.begin(), ids.end(), rng);
    out.insert(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

json experiment_to_json(const Experiment& e) {
  json mask;
  to_json(mask, e.mask_cfg);
  return {{"model", spec_to_json(e.spec)},
          {"train", e.train},
          {"mask", to_string(e.mask)},
          {"mask_config", mask},
          {"occlude_test", e.occlude_test}};
}

namespace {

std::set<std::string> subjects_of(const FeatureDataset& ds) {
  std::set<std::string> out;
  for (const auto& r : ds.records) out.insert(r.subject_id);
  return out;
}

}  // namespace

ExperimentResult run_experiment(const FeatureDataset& train_pool, const FeatureDataset& test,
                                const Experiment& exp) {
  exp.train.validate();
  if (train_pool.size() == 0) throw Error(Errc::EmptySplit, "training pool is empty");
  if (test.size() == 0) throw Error(Errc::EmptySplit, "test set is empty");
  if (test.rows != train_pool.rows || test.cols != train_pool.cols) {
    throw Error(Errc::ShapeMismatch, "train and test matrices differ in shape");
  }
  for (const auto& id : subjects_of(test)) {
    if (subjects_of(train_pool).count(id)) {
      throw Error(Errc::InvalidArgument, "subject '" + id + "' appears in train and test");
    }
  }
  ModelSpec spec = exp.spec;
  spec.in_channels = 1;
  spec.in_f = train_pool.rows;
  spec.in_t = train_pool.cols;
  if (exp.mask != MaskMode::None || exp.occlude_test) {
    if (!spec.convolutional()) throw Error(Errc::InvalidArgument, "masking needs matrix inputs");
    exp.mask_cfg.validate(spec.in_f, spec.in_t);
  }

  std::set<std::string> val_ids =
      carve_validation(train_pool.records, exp.train.val_fraction, derive_seed(exp.train.seed, {0x7a1}));
  std::set<std::string> train_ids;
  for (const auto& id : subjects_of(train_pool)) {
    if (!val_ids.count(id)) train_ids.insert(id);
  }
  LabeledTensor tr = to_tensor(train_pool.subset(train_ids), spec);
  LabeledTensor va = to_tensor(train_pool.subset(val_ids), spec);
  LabeledTensor te = to_tensor(test, spec);
  if (tr.size() == 0 || va.size() == 0) throw Error(Errc::EmptySplit, "validation carve left a set empty");

  Standardizer stats = Standardizer::fit(tr.x);
  stats.apply(tr.x);
  stats.apply(va.x);
  stats.apply(te.x);

  if (exp.occlude_test) {
    for (std::size_t i = 0; i < te.size(); ++i) {
      std::mt19937_64 rng(derive_seed(exp.train.seed, {3, i}));
      apply_mask(te.x.sample(i), spec.in_f, spec.in_t, exp.mask, exp.mask_cfg, rng);
    }
  }
  SampleHook hook;
  if (exp.mask != MaskMode::None) {
    hook = [&](double* sample, std::mt19937_64& rng) {
      apply_mask(sample, spec.in_f, spec.in_t, exp.mask, exp.mask_cfg, rng);
    };
  }

  Model model(spec);
  model.init(exp.train.seed);
  FitReport report = fit(model, tr, va, &te, exp.train, hook);
  return {std::move(model), std::move(stats), std::move(report),
          std::vector<std::string>(val_ids.begin(), val_ids.end())};
}

Evaluation evaluate_dataset(Model& model, const Standardizer& stats, const FeatureDataset& ds) {
  LabeledTensor t = to_tensor(ds, model.spec());
  stats.apply(t.x);
  return evaluate(model, t);
}

// ---------------------------------------------------------------------------

namespace {
constexpr char kWeightsMagic[4] = {'V', 'S', 'W', 'B'};
constexpr std::size_t kWeightsHeader = 4 + 1 + 3 + 4;
}  // namespace

std::string encode_weights(Model& model) {
  const auto params = model.params();
  std::string out(kWeightsMagic, 4);
  put_le<std::uint8_t>(out, kWeightsVersion);
  out.append(3, '\0');
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const Param* p : params) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.size()));
    for (double v : p->value.data) put_le<float>(out, static_cast<float>(v));
  }
  return out;
}

void decode_weights(std::string_view bytes, Model& model) {
  ByteReader in(bytes);
  if (!in.can_read(4) || std::memcmp(in.take(4).data(), kWeightsMagic, 4) != 0) {
    throw Error(Errc::BadMagic, "not a weights blob");
  }
  if (!in.can_read(kWeightsHeader - 4)) throw Error(Errc::TruncatedFile, "weights header cut short");
  const auto version = in.get<std::uint8_t>();
  if (version != kWeightsVersion) {
    throw Error(Errc::VersionMismatch, "weights version " + std::to_string(version) + ", expected " +
                                           std::to_string(kWeightsVersion));
  }
  in.take(3);
  const auto params = model.params();
  const auto count = in.get<std::uint32_t>();
  if (count != params.size()) {
    throw Error(Errc::ShapeMismatch, "blob holds " + std::to_string(count) + " tensors, model has " +
                                         std::to_string(params.size()));
  }
  std::vector<Buffer> values;
  for (const Param* p : params) {
    if (!in.can_read(4)) throw Error(Errc::TruncatedFile, "weights blob cut short");
    const auto n = in.get<std::uint32_t>();
    if (n != p->value.size()) {
      throw Error(Errc::ShapeMismatch, "tensor '" + p->name + "' has " + std::to_string(n) + " values, expected " +
                                           std::to_string(p->value.size()));
    }
    if (!in.can_read(std::size_t{n} * 4)) throw Error(Errc::TruncatedFile, "weights blob cut short");
    auto& v = values.emplace_back(n);
    for (double& x : v) x = in.get<float>();
  }
  if (in.remaining() != 0) throw Error(Errc::InvalidArgument, "trailing bytes after the last tensor");
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->value.data = std::move(values[k]);
}

namespace {
fs::path blob_path(const fs::path& json_path) {
  fs::path p = json_path;
  p.replace_extension(".bin");
  return p;
}
}  // namespace

void save_weights(Model& model, const Standardizer& stats, const fs::path& json_path) {
  json tensors = json::array();
  std::size_t k = 0;
  for (const Param* p : model.params()) {
    tensors.push_back({{"name", std::to_string(k++) + "." + p->name}, {"shape", p->value.shape}});
  }
  const json meta{{"format", "vocalscreen-weights"},
                  {"version", kWeightsVersion},
                  {"spec", spec_to_json(model.spec())},
                  {"tensors", std::move(tensors)},
                  {"input_stats", standardizer_to_json(stats)},
                  {"blob", blob_path(json_path).filename().string()}};
  write_file_atomic(blob_path(json_path), encode_weights(model));
  write_file_atomic(json_path, meta.dump(2) + "\n");
}

LoadedModel load_weights(const fs::path& json_path) {
  json meta;
  try {
    meta = json::parse(read_file(json_path));
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, "cannot parse " + json_path.string() + ": " + e.what());
  }
  if (meta.value("format", std::string()) != "vocalscreen-weights") {
    throw Error(Errc::BadMagic, json_path.string() + " is not a weights file");
  }
  if (meta.value("version", 0) != kWeightsVersion) {
    throw Error(Errc::VersionMismatch, "weights metadata version " + meta.value("version", json(0)).dump());
  }
  LoadedModel out{Model(spec_from_json(meta.at("spec"))),
                  standardizer_from_json(meta.value("input_stats", json::object()))};
  fs::path blob = json_path.parent_path() / meta.value("blob", blob_path(json_path).filename().string());
  decode_weights(read_file(blob), out.model);
  if (!out.stats.empty() && out.stats.mean.size() != shape_size(out.model.spec().input_shape())) {
    throw Error(Errc::ShapeMismatch, "input statistics do not match the model input");
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<ModelSpec> GridSpace::cells(const ModelSpec& base) const {
  std::vector<ModelSpec> out;
  for (Mode mode : modes) {
    const std::size_t depth_options = dilation_sets.empty() ? layers.size() : dilation_sets.size();
    for (std::size_t d = 0; d < depth_options; ++d) {
      for (std::size_t kernel : kernels) {
        ModelSpec s = base;
        s.mode = mode;
        s.kernel = kernel;
        if (dilation_sets.empty()) {
          s.n_layers = layers[d];
          s.dilations.assign(s.n_layers, default_dilation);
        } else {
          s.dilations = dilation_sets[d];
          s.n_layers = s.dilations.size();
        }
        s.validate();
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

std::pair<double, double> mean_std(std::span<const double> v) {
  if (v.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

std::vector<GridRow> grid_search(const FeatureDataset& train_pool, const FeatureDataset& test,
                                 const GridSpace& space, const Experiment& base, std::size_t repeats,
                                 std::size_t jobs) {
  if (repeats == 0) throw Error(Errc::InvalidArgument, "need at least one repeat");
  const auto cells = space.cells(base.spec);
  std::vector<Metrics> results(cells.size() * repeats);
  parallel_for(results.size(), jobs, [&](std::size_t task) {
    Experiment e = base;
    e.spec = cells[task / repeats];
    e.train.seed = derive_seed(base.train.seed, {task % repeats});
    results[task] = run_experiment(train_pool, test, e).report.test_segment;
  });
  std::vector<GridRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<double> acc, f1;
    for (std::size_t r = 0; r < repeats; ++r) {
      acc.push_back(results[c * repeats + r].accuracy);
      f1.push_back(results[c * repeats + r].f1);
    }
    GridRow row;
    row.spec = cells[c];
    row.receptive_field = cells[c].convolutional() ? receptive_field(cells[c].kernel, cells[c].dilations) : 0;
    std::tie(row.acc_mean, row.acc_std) = mean_std(acc);
    std::tie(row.f1_mean, row.f1_std) = mean_std(f1);
    row.repeats = repeats;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}
}  // namespace

std::string grid_csv(const std::vector<GridRow>& rows) {
  std::string out = "mode,layers,kernel,dilations,receptive_field,acc_mean,acc_std,f1_mean,f1_std,repeats\n";
  for (const auto& r : rows) {
    std::string dil = "\"(";
    for (std::size_t i = 0; i < r.spec.dilations.size(); ++i) {
      if (i) dil += ',';
      dil += std::to_string(r.spec.dilations[i]);
    }
    dil += ")\"";
    out += std::string(to_string(r.spec.mode)) + "," + std::to_string(r.spec.n_layers) + "," +
           std::to_string(r.spec.kernel) + "," + dil + "," + std::to_string(r.receptive_field) + "," +
           fmt(r.acc_mean) + "," + fmt(r.acc_std) + "," + fmt(r.f1_mean) + "," + fmt(r.f1_std) + "," +
           std::to_string(r.repeats) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view ablation_label(MaskMode m) {
  switch (m) {
    case MaskMode::None: return "Original";
    case MaskMode::Time: return "T Mask";
    case MaskMode::Freq: return "F Mask";
    case MaskMode::TimeFreq: return "T-F Mask";
  }
  return "?";
}

std::vector<AblationRow> ablate_masks(const FeatureDataset& train_pool, const FeatureDataset& test,
                                      const Experiment& base, std::span<const MaskMode> modes,
                                      std::span<const std::uint64_t> seeds, std::size_t jobs) {
  if (modes.empty() || seeds.empty()) throw Error(Errc::InvalidArgument, "need mask modes and seeds");
  std::vector<Metrics> results(modes.size() * seeds.size());
  parallel_for(results.size(), jobs, [&](std::size_t task) {
    Experiment e = base;
    e.mask = modes[task / seeds.size()];
    e.train.seed = seeds[task % seeds.size()];
    results[task] = run_experiment(train_pool, test, e).report.test_segment;
  });
  std::vector<AblationRow> rows;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    AblationRow row;
    row.kind = train_pool.kind;
    row.mask = modes[m];
    std::vector<double> f1;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      row.accuracies.push_back(results[m * seeds.size() + s].accuracy);
      f1.push_back(results[m * seeds.size() + s].f1);
    }
    std::tie(row.acc_mean, row.acc_std) = mean_std(row.accuracies);
    std::tie(row.f1_mean, row.f1_std) = mean_std(f1);
    row.repeats = seeds.size();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "feature,variant,acc_mean,acc_std,f1_mean,f1_std,repeats\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.kind)) + "," + std::string(ablation_label(r.mask)) + "," + fmt(r.acc_mean) +
           "," + fmt(r.acc_std) + "," + fmt(r.f1_mean) + "," + fmt(r.f1_std) + "," + std::to_string(r.repeats) +
           "\n";
  }
  return out;
}

}  // namespace vocalscreen::nn
