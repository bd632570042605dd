// src/forest.cpp

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

#include "vocalscreen/forest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "vocalscreen/error.hpp"
#include "vocalscreen/parallel.hpp"
#include "vocalscreen/rng.hpp"

namespace vocalscreen {

using nlohmann::json;

Samples Samples::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Samples s(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != s.features) {
      throw Error(Errc::DimensionMismatch, "sample rows differ in length");
    }
    std::copy(rows[i].begin(), rows[i].end(), s.row(i).begin());
  }
  return s;
}

std::size_t ForestConfig::effective_mtry(std::size_t features) const {
  if (mtry != 0) return mtry;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(features))));
}

void ForestConfig::validate(std::size_t features) const {
  if (n_trees < 1) throw Error(Errc::InvalidArgument, "n_trees must be at least 1");
  if (min_leaf < 1) throw Error(Errc::InvalidArgument, "min_leaf must be at least 1");
  const std::size_t m = effective_mtry(features);
  if (m < 1 || m > features) {
    throw Error(Errc::InvalidArgument,
                "mtry " + std::to_string(m) + " outside [1, " + std::to_string(features) + "]");
  }
}

void to_json(json& j, const ForestConfig& cfg) {
  j = json{{"n_trees", cfg.n_trees},
           {"max_depth", cfg.max_depth},
           {"min_leaf", cfg.min_leaf},
           {"mtry", cfg.mtry},
           {"seed", cfg.seed}};
}

void from_json(const json& j, ForestConfig& cfg) {
  cfg.n_trees = j.value("n_trees", cfg.n_trees);
  cfg.max_depth = j.value("max_depth", cfg.max_depth);
  cfg.min_leaf = j.value("min_leaf", cfg.min_leaf);
  cfg.mtry = j.value("mtry", cfg.mtry);
  cfg.seed = j.value("seed", cfg.seed);
}

int Tree::predict(std::span<const double> x) const {
  int at = 0;
  while (nodes[at].feature >= 0) {
    const TreeNode& n = nodes[at];
    at = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
  }
  return nodes[at].counts[1] >= nodes[at].counts[0] ? 1 : 0;
}

namespace {

double gini(double n0, double n1) {
  const double n = n0 + n1;
  if (n <= 0.0) return 0.0;
  const double p0 = n0 / n, p1 = n1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

class TreeBuilder {
 public:
  TreeBuilder(const Samples& x, std::span<const int> y, const ForestConfig& cfg, std::uint64_t seed)
      : x_(x), y_(y), cfg_(cfg), mtry_(cfg.effective_mtry(x.features)), rng_(seed) {
    pool_.resize(x.features);
    std::iota(pool_.begin(), pool_.end(), 0);
  }

  /// Grows a tree on `idx` (a bootstrap sample, duplicates allowed).
  Tree grow(std::vector<std::size_t> idx) {
    idx_ = std::move(idx);
    n_root_ = static_cast<double>(idx_.size());
    tree_ = Tree{};
    build(0, idx_.size(), 0);
    return std::move(tree_);
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  int build(std::size_t lo, std::size_t hi, std::size_t depth) {
    TreeNode node;
    for (std::size_t i = lo; i < hi; ++i) node.counts[y_[idx_[i]]]++;
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(node);

    const std::size_t n = hi - lo;
    if (depth >= cfg_.max_depth || n < 2 * cfg_.min_leaf || node.counts[0] == 0 || node.counts[1] == 0) {
      return id;
    }
    const double node_gini = gini(node.counts[0], node.counts[1]);

    // Partial Fisher-Yates: the first mtry entries of pool_ are the candidates.
    for (std::size_t k = 0; k < mtry_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, pool_.size() - 1);
      std::swap(pool_[k], pool_[pick(rng_)]);
    }

    double best_child = node_gini;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (std::size_t k = 0; k < mtry_; ++k) {
      const std::size_t f = pool_[k];
      buf_.clear();
      for (std::size_t i = lo; i < hi; ++i) buf_.emplace_back(x_.row(idx_[i])[f], y_[idx_[i]]);
      std::sort(buf_.begin(), buf_.end());
      double left[2] = {0.0, 0.0};
      const double total[2] = {static_cast<double>(node.counts[0]), static_cast<double>(node.counts[1])};
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left[buf_[i].second] += 1.0;
        const std::size_t n_left = i + 1;
        if (n_left < cfg_.min_leaf) continue;
        if (n - n_left < cfg_.min_leaf) break;
        if (!(buf_[i].first < buf_[i + 1].first)) continue;
        const double nl = static_cast<double>(n_left), nr = static_cast<double>(n - n_left);
        const double child = (nl * gini(left[0], left[1]) +
                              nr * gini(total[0] - left[0], total[1] - left[1])) /
                             static_cast<double>(n);
        if (child < best_child) {
          best_child = child;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (buf_[i].first + buf_[i + 1].first);
          if (!(best_threshold > buf_[i].first)) best_threshold = buf_[i + 1].first;
        }
      }
    }
    if (best_feature < 0 || node_gini - best_child <= 1e-12) return id;

    const auto f = static_cast<std::size_t>(best_feature);
    const auto mid = std::partition(idx_.begin() + static_cast<std::ptrdiff_t>(lo),
                                    idx_.begin() + static_cast<std::ptrdiff_t>(hi),
                                    [&](std::size_t s) { return x_.row(s)[f] < best_threshold; });
    const auto split = static_cast<std::size_t>(mid - idx_.begin());
    const int left = build(lo, split, depth + 1);
    const int right = build(split, hi, depth + 1);
    TreeNode& stored = tree_.nodes[static_cast<std::size_t>(id)];
    stored.feature = best_feature;
    stored.threshold = best_threshold;
    stored.left = left;
    stored.right = right;
    stored.weighted_decrease = static_cast<double>(n) / n_root_ * (node_gini - best_child);
    return id;
  }

  const Samples& x_;
  std::span<const int> y_;
  const ForestConfig& cfg_;
  std::size_t mtry_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> pool_;
  std::vector<std::size_t> idx_;
  std::vector<std::pair<double, int>> buf_;
  double n_root_ = 0.0;
  Tree tree_;
};

}  // namespace

ForestModel train_forest(const Samples& x, std::span<const int> y, const ForestConfig& cfg) {
  if (x.n == 0 || x.features == 0) throw Error(Errc::EmptyData, "no training samples");
  if (y.size() != x.n) throw Error(Errc::LengthMismatch, "one label per sample required");
  if (x.n < 2) throw Error(Errc::EmptyData, "at least two samples required");
  std::size_t ones = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw Error(Errc::InvalidLabel, "labels must be 0 or 1");
    ones += static_cast<std::size_t>(v);
  }
  if (ones == 0 || ones == x.n) throw Error(Errc::SingleClass, "training labels contain one class");
  cfg.validate(x.features);

  ForestModel model;
  model.n_features = x.features;
  model.trees.resize(cfg.n_trees);
  std::vector<std::vector<bool>> in_bag(cfg.n_trees);
  parallel_for(cfg.n_trees, cfg.jobs, [&](std::size_t t) {
    TreeBuilder builder(x, y, cfg, derive_seed(cfg.seed, {t}));
    std::uniform_int_distribution<std::size_t> draw(0, x.n - 1);
    std::vector<std::size_t> idx(x.n);
    in_bag[t].assign(x.n, false);
    for (auto& i : idx) {
      i = draw(builder.rng());
      in_bag[t][i] = true;
    }
    model.trees[t] = builder.grow(std::move(idx));
  });

  std::vector<std::size_t> votes(x.n, 0), ones_votes(x.n, 0);
  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    for (std::size_t i = 0; i < x.n; ++i) {
      if (in_bag[t][i]) continue;
      votes[i]++;
      ones_votes[i] += static_cast<std::size_t>(model.trees[t].predict(x.row(i)));
    }
  }
  std::size_t scored = 0, correct = 0;
  for (std::size_t i = 0; i < x.n; ++i) {
    if (votes[i] == 0) continue;
    ++scored;
    const int pred = 2 * ones_votes[i] >= votes[i] ? 1 : 0;
    correct += pred == y[i];
  }
  model.oob_score = scored ? static_cast<double>(correct) / static_cast<double>(scored) : 0.0;
  return model;
}

double predict_forest(const ForestModel& model, std::span<const double> x) {
  if (x.size() != model.n_features) {
    throw Error(Errc::DimensionMismatch, "expected " + std::to_string(model.n_features) +
                                             " features, got " + std::to_string(x.size()));
  }
  if (model.trees.empty()) throw Error(Errc::InvalidArgument, "forest has no trees");
  std::size_t ones = 0;
  for (const Tree& t : model.trees) ones += static_cast<std::size_t>(t.predict(x));
  return static_cast<double>(ones) / static_cast<double>(model.trees.size());
}

std::vector<double> predict_forest(const ForestModel& model, const Samples& x) {
  std::vector<double> out(x.n);
  for (std::size_t i = 0; i < x.n; ++i) out[i] = predict_forest(model, x.row(i));
  return out;
}

std::vector<double> mdi_importance(const ForestModel& model) {
  std::vector<double> imp(model.n_features, 0.0);
  for (const Tree& t : model.trees) {
    for (const TreeNode& n : t.nodes) {
      if (n.feature >= 0) imp[static_cast<std::size_t>(n.feature)] += n.weighted_decrease;
    }
  }
  const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (total <= 0.0) {
    // No split anywhere: nothing distinguishes the features.
    std::fill(imp.begin(), imp.end(), 1.0 / static_cast<double>(imp.size()));
    return imp;
  }
  // Averaging over trees is a common factor that the normalisation cancels.
  for (double& v : imp) v /= total;
  return imp;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> zscore(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> z(v.size(), 0.0);
  if (sd > 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) z[i] = (v[i] - mean) / sd;
  }
  return z;
}

std::vector<std::size_t> descending(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  return order;
}

}  // namespace

ImportanceReport kfold_importance(const Samples& x, std::span<const int> y,
                                  std::span<const std::string> subjects, std::size_t k,
                                  const ForestConfig& cfg) {
  if (k < 2) throw Error(Errc::InvalidArgument, "need at least two folds");
  if (x.n == 0) throw Error(Errc::EmptyData, "no samples");
  if (y.size() != x.n || subjects.size() != x.n) {
    throw Error(Errc::LengthMismatch, "labels and subjects must match the sample count");
  }
  if (x.n < k) throw Error(Errc::InvalidArgument, "fewer samples than folds");

  // Subjects in order of first appearance, grouped by label.
  std::map<std::string, std::size_t> subject_fold;
  std::vector<std::string> by_label[2];
  for (std::size_t i = 0; i < x.n; ++i) {
    if (subject_fold.emplace(subjects[i], 0).second) by_label[y[i] == 1].push_back(subjects[i]);
  }
  if (subject_fold.size() < k) throw Error(Errc::InvalidArgument, "fewer subjects than folds");
  std::mt19937_64 rng(derive_seed(cfg.seed, {0xf01d}));
  std::size_t slot = 0;
  for (auto& group : by_label) {
    std::shuffle(group.begin(), group.end(), rng);
    for (const auto& s : group) subject_fold[s] = slot++ % k;
  }

  ImportanceReport rep;
  rep.folds = k;
  rep.features = x.features;
  rep.raw.resize(k);
  rep.z.resize(k);
  rep.fold_top.resize(k);
  rep.fold_accuracy.resize(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < x.n; ++i) (subject_fold[subjects[i]] == f ? test : train).push_back(i);
    Samples xt(train.size(), x.features);
    std::vector<int> yt(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      std::copy_n(x.row(train[i]).begin(), x.features, xt.row(i).begin());
      yt[i] = y[train[i]];
    }
    ForestConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(cfg.seed, {f});
    const ForestModel model = train_forest(xt, yt, fold_cfg);
    rep.raw[f] = mdi_importance(model);
    rep.z[f] = zscore(rep.raw[f]);
    rep.fold_top[f] = descending(rep.z[f]).front();
    std::size_t correct = 0;
    for (std::size_t i : test) correct += (predict_forest(model, x.row(i)) >= 0.5) == (y[i] == 1);
    rep.fold_accuracy[f] = test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
  }
  rep.mean_z.assign(x.features, 0.0);
  for (const auto& z : rep.z) {
    for (std::size_t j = 0; j < x.features; ++j) rep.mean_z[j] += z[j] / static_cast<double>(k);
  }
  rep.ranking = descending(rep.mean_z);
  return rep;
}

std::string importance_csv(const ImportanceReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << "fold,kind";
  for (std::size_t j = 0; j < r.features; ++j) os << ",f" << j;
  os << '\n';
  for (std::size_t f = 0; f < r.folds; ++f) {
    for (const auto& [name, rows] : {std::pair{"raw", &r.raw}, std::pair{"z", &r.z}}) {
      os << f << ',' << name;
      for (double v : (*rows)[f]) os << ',' << v;
      os << '\n';
    }
  }
  return os.str();
}

json importance_json(const ImportanceReport& r) {
  json ranking = json::array();
  for (std::size_t pos = 0; pos < r.ranking.size(); ++pos) {
    const std::size_t j = r.ranking[pos];
    ranking.push_back({{"rank", pos + 1}, {"feature", j}, {"mean_z", r.mean_z[j]}});
  }
  return {{"folds", r.folds},
          {"features", r.features},
          {"ranking", ranking},
          {"fold_top", r.fold_top},
          {"fold_accuracy", r.fold_accuracy}};
}

}  // namespace vocalscreen
