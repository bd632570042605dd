// include/vocalscreen/forest.hpp

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
#include <string>
#include <vector>

#include "json.hpp"

namespace vocalscreen {

/// Row-major n x F sample matrix.
struct Samples {
  std::size_t n = 0;
  std::size_t features = 0;
  std::vector<double> data;

  Samples() = default;
  Samples(std::size_t rows, std::size_t cols) : n(rows), features(cols), data(rows * cols, 0.0) {}
  static Samples from_rows(const std::vector<std::vector<double>>& rows);

  std::span<const double> row(std::size_t i) const { return {data.data() + i * features, features}; }
  std::span<double> row(std::size_t i) { return {data.data() + i * features, features}; }
};

struct ForestConfig {
  std::size_t n_trees = 200;
  std::size_t max_depth = 12;
  std::size_t min_leaf = 2;
  /// 0 means floor(sqrt(F)).
  std::size_t mtry = 0;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  std::size_t effective_mtry(std::size_t features) const;
  /// Throws InvalidArgument.
  void validate(std::size_t features) const;
};

void to_json(nlohmann::json& j, const ForestConfig& cfg);
void from_json(const nlohmann::json& j, ForestConfig& cfg);

struct TreeNode {
  /// -1 for leaves.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Bootstrap samples of class 0 and 1 that reached this node.
  std::uint32_t counts[2] = {0, 0};
  /// Node weight times Gini decrease; 0 at leaves.
  double weighted_decrease = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  /// Majority class of the leaf x falls into; ties go to 1.
  int predict(std::span<const double> x) const;
};

struct ForestModel {
  std::size_t n_features = 0;
  std::vector<Tree> trees;
  double oob_score = 0.0;
};

/// Bootstrap per tree, Gini splits over mtry random features with midpoint
/// thresholds. Throws EmptyData or SingleClass.
ForestModel train_forest(const Samples& x, std::span<const int> y, const ForestConfig& cfg);

/// Fraction of trees voting 1. Throws DimensionMismatch.
double predict_forest(const ForestModel& model, std::span<const double> x);
std::vector<double> predict_forest(const ForestModel& model, const Samples& x);

/// Mean decrease in impurity, averaged over trees and normalised to sum 1.
std::vector<double> mdi_importance(const ForestModel& model);

struct ImportanceReport {
  std::size_t folds = 0;
  std::size_t features = 0;
  /// folds x features.
  std::vector<std::vector<double>> raw;
  std::vector<std::vector<double>> z;
  std::vector<double> mean_z;
  /// Feature indices by descending mean z.
  std::vector<std::size_t> ranking;
  /// Highest-z feature of each fold.
  std::vector<std::size_t> fold_top;
  /// Held-out accuracy of each fold's forest.
  std::vector<double> fold_accuracy;
};

/// Assigns whole subjects to k folds (label-stratified round robin after a
/// seeded shuffle). For each fold, trains on the other folds, takes MDI and
/// z-scores it across features with the population standard deviation.
ImportanceReport kfold_importance(const Samples& x, std::span<const int> y,
                                  std::span<const std::string> subjects, std::size_t k,
                                  const ForestConfig& cfg);

/// Fold rows: fold,kind,f0..fN where kind is raw or z.
std::string importance_csv(const ImportanceReport& r);
nlohmann::json importance_json(const ImportanceReport& r);

}  // namespace vocalscreen
