// include/vocalscreen/nn/experiment.hpp

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
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vocalscreen/augment.hpp"
#include "vocalscreen/dataset.hpp"
#include "vocalscreen/nn/train.hpp"

namespace vocalscreen::nn {

/// Per-position z-scoring fitted on training inputs. Positions with zero
/// spread get unit scale.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Tensor& x);
  /// ShapeMismatch when the per-sample size differs from the fitted one.
  void apply(Tensor& x) const;
  bool empty() const { return mean.empty(); }
};

nlohmann::json standardizer_to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

/// Converts a dataset to model input: (N, 1, rows, cols) for convolutional
/// modes, (N, rows) F-vectors for RSENet. ShapeMismatch if the dataset
/// disagrees with the spec's input size.
LabeledTensor to_tensor(const FeatureDataset& ds, const ModelSpec& spec);

/// Holds out round(fraction * n) subjects of each label (at least one when
/// the label has two or more subjects).
std::set<std::string> carve_validation(std::span<const SegmentRecord> records, double fraction,
                                       std::uint64_t seed);

struct Experiment {
  ModelSpec spec;
  TrainConfig train;
  MaskMode mask = MaskMode::None;
  MaskConfig mask_cfg;
  /// Also mask test inputs, for the occlusion reading of the ablation.
  bool occlude_test = false;
};

nlohmann::json experiment_to_json(const Experiment& e);

struct ExperimentResult {
  Model model;
  Standardizer stats;
  FitReport report;
  std::vector<std::string> val_subjects;
};

/// Carves validation subjects from `train_pool`, standardizes, trains with
/// optional masking and scores `test`. The spec's input size is taken from
/// the data.
ExperimentResult run_experiment(const FeatureDataset& train_pool, const FeatureDataset& test,
                                const Experiment& exp);

/// Standardizes `ds` with the model's stats and scores it.
Evaluation evaluate_dataset(Model& model, const Standardizer& stats, const FeatureDataset& ds);

// ---------------------------------------------------------------------------

inline constexpr std::uint8_t kWeightsVersion = 1;

/// "VSWB", u8 version, 3 reserved bytes, u32 tensor count, then per tensor
/// a u32 value count and that many little-endian float32 values.
std::string encode_weights(Model& model);
/// Errors: BadMagic, VersionMismatch, TruncatedFile, ShapeMismatch.
void decode_weights(std::string_view bytes, Model& model);

/// Writes `json_path` (spec, tensor shapes, input stats) and the blob next to
/// it with extension ".bin".
void save_weights(Model& model, const Standardizer& stats, const std::filesystem::path& json_path);

struct LoadedModel {
  Model model;
  Standardizer stats;
};

LoadedModel load_weights(const std::filesystem::path& json_path);

// ---------------------------------------------------------------------------

struct GridSpace {
  std::vector<Mode> modes{Mode::Pure1dF};
  std::vector<std::size_t> layers{4};
  std::vector<std::size_t> kernels{3};
  /// When non-empty each tuple fixes both depth and dilations, and `layers`
  /// is ignored.
  std::vector<std::vector<std::size_t>> dilation_sets;
  std::size_t default_dilation = 2;

  std::vector<ModelSpec> cells(const ModelSpec& base) const;
};

struct GridRow {
  ModelSpec spec;
  std::size_t receptive_field = 0;
  double acc_mean = 0.0, acc_std = 0.0;
  double f1_mean = 0.0, f1_std = 0.0;
  std::size_t repeats = 0;
};

/// Trains every cell `repeats` times; repeat r uses seed
/// derive_seed(base.train.seed, {r}) in every cell. Cells run on `jobs`
/// threads, rows come back in cell order.
std::vector<GridRow> grid_search(const FeatureDataset& train_pool, const FeatureDataset& test,
                                 const GridSpace& space, const Experiment& base, std::size_t repeats,
                                 std::size_t jobs);

std::string grid_csv(const std::vector<GridRow>& rows);

/// Mean and sample standard deviation (0 for fewer than two values).
std::pair<double, double> mean_std(std::span<const double> v);

// ---------------------------------------------------------------------------

struct AblationRow {
  FeatureKind kind = FeatureKind::Mfcc;
  MaskMode mask = MaskMode::None;
  double acc_mean = 0.0, acc_std = 0.0;
  double f1_mean = 0.0, f1_std = 0.0;
  std::vector<double> accuracies;
  std::size_t repeats = 0;
};

/// Original, T Mask, F Mask, T-F Mask.
std::string_view ablation_label(MaskMode m);

/// Trains one model per (mask mode, seed) and scores it on `test`, clean
/// unless base.occlude_test is set.
std::vector<AblationRow> ablate_masks(const FeatureDataset& train_pool, const FeatureDataset& test,
                                      const Experiment& base, std::span<const MaskMode> modes,
                                      std::span<const std::uint64_t> seeds, std::size_t jobs);

std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace vocalscreen::nn
