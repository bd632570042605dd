// tests/forest_test.cpp

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
#include <numeric>
#include <random>

#include "test_util.hpp"
#include "vocalscreen/forest.hpp"

using namespace vocalscreen;

namespace {

struct Toy {
  Samples x;
  std::vector<int> y;
};

/// x0 carries the class (x0 < 0 <=> class 0); the rest is noise.
Toy separable(std::size_t n, std::size_t features, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Toy t{Samples(n, features), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    t.y[i] = static_cast<int>(i % 2);
    for (std::size_t f = 0; f < features; ++f) t.x.row(i)[f] = g(rng);
    t.x.row(i)[0] = (t.y[i] ? 1.0 : -1.0) * (0.1 + std::abs(g(rng)));
  }
  return t;
}

/// Class decided by x0 + x1 > 0, so no single axis split is perfect.
Toy diagonal(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Toy t{Samples(n, 2), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u(rng), b = u(rng);
    t.x.row(i)[0] = a;
    t.x.row(i)[1] = b;
    t.y[i] = a + b > 0 ? 1 : 0;
  }
  return t;
}

double accuracy(const ForestModel& m, const Toy& t) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < t.x.n; ++i) correct += (predict_forest(m, t.x.row(i)) >= 0.5) == (t.y[i] == 1);
  return static_cast<double>(correct) / static_cast<double>(t.x.n);
}

/// Best single threshold on a single feature, chosen on the training set.
double stump_accuracy(const Toy& train, const Toy& test) {
  double best_acc = 0.0;
  std::size_t best_f = 0;
  double best_thr = 0.0;
  int best_dir = 1;
  for (std::size_t f = 0; f < train.x.features; ++f) {
    for (std::size_t i = 0; i < train.x.n; ++i) {
      const double thr = train.x.row(i)[f];
      for (int dir : {1, -1}) {
        std::size_t c = 0;
        for (std::size_t j = 0; j < train.x.n; ++j) {
          c += ((dir * (train.x.row(j)[f] - thr) > 0) ? 1 : 0) == train.y[j];
        }
        const double acc = static_cast<double>(c) / static_cast<double>(train.x.n);
        if (acc > best_acc) {
          best_acc = acc;
          best_f = f;
          best_thr = thr;
          best_dir = dir;
        }
      }
    }
  }
  std::size_t c = 0;
  for (std::size_t j = 0; j < test.x.n; ++j) {
    c += ((best_dir * (test.x.row(j)[best_f] - best_thr) > 0) ? 1 : 0) == test.y[j];
  }
  return static_cast<double>(c) / static_cast<double>(test.x.n);
}

ForestConfig small_cfg(std::uint64_t seed, std::size_t trees = 50) {
  ForestConfig cfg;
  cfg.n_trees = trees;
  cfg.seed = seed;
  return cfg;
}

void expect_identical(const ForestModel& a, const ForestModel& b) {
  ASSERT_EQ(a.trees.size(), b.trees.size());
  EXPECT_EQ(a.oob_score, b.oob_score);
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    ASSERT_EQ(a.trees[t].nodes.size(), b.trees[t].nodes.size());
    for (std::size_t n = 0; n < a.trees[t].nodes.size(); ++n) {
      const TreeNode& p = a.trees[t].nodes[n];
      const TreeNode& q = b.trees[t].nodes[n];
      ASSERT_EQ(p.feature, q.feature);
      ASSERT_EQ(p.threshold, q.threshold);
      ASSERT_EQ(p.left, q.left);
      ASSERT_EQ(p.counts[0], q.counts[0]);
      ASSERT_EQ(p.counts[1], q.counts[1]);
      ASSERT_EQ(p.weighted_decrease, q.weighted_decrease);
    }
  }
}

}  // namespace

TEST(Forest, SeparatingFeatureFitsTrainingSet) {
  const Toy t = separable(200, 8, 1);
  const ForestModel m = train_forest(t.x, t.y, small_cfg(3));
  EXPECT_EQ(accuracy(m, t), 1.0);
  EXPECT_GE(m.oob_score, 0.0);
  EXPECT_LE(m.oob_score, 1.0);
}

TEST(Forest, HeldOutAccuracyOnSeparableSet) {
  const Toy train = separable(300, 8, 2);
  const Toy test = separable(300, 8, 102);
  EXPECT_GT(accuracy(train_forest(train.x, train.y, small_cfg(4)), test), 0.95);
}

TEST(Forest, BeatsDecisionStumpOnDiagonalBoundary) {
  const Toy train = diagonal(400, 5);
  const Toy test = diagonal(400, 6);
  ForestConfig cfg = small_cfg(7, 100);
  cfg.mtry = 1;
  EXPECT_GT(accuracy(train_forest(train.x, train.y, cfg), test), stump_accuracy(train, test));
}

TEST(Forest, DeterministicForSeedAndThreadCount) {
  const Toy t = separable(150, 10, 8);
  ForestConfig cfg = small_cfg(9);
  const ForestModel a = train_forest(t.x, t.y, cfg);
  cfg.jobs = 3;
  const ForestModel b = train_forest(t.x, t.y, cfg);
  expect_identical(a, b);
  cfg.seed = 10;
  const ForestModel c = train_forest(t.x, t.y, cfg);
  bool differs = false;
  for (std::size_t i = 0; i < a.trees.size() && !differs; ++i) {
    differs = a.trees[i].nodes.size() != c.trees[i].nodes.size() ||
              a.trees[i].nodes[0].threshold != c.trees[i].nodes[0].threshold;
  }
  EXPECT_TRUE(differs);
}

TEST(Forest, StructuralInvariants) {
  const Toy t = separable(120, 6, 11);
  ForestConfig cfg = small_cfg(12);
  cfg.max_depth = 3;
  cfg.min_leaf = 4;
  const ForestModel m = train_forest(t.x, t.y, cfg);
  for (const Tree& tree : m.trees) {
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [id, depth] = stack.back();
      stack.pop_back();
      const TreeNode& n = tree.nodes[static_cast<std::size_t>(id)];
      EXPECT_LE(depth, 3u);
      EXPECT_GE(n.counts[0] + n.counts[1], 4u);
      if (n.feature >= 0) {
        EXPECT_LT(static_cast<std::size_t>(n.feature), 6u);
        const TreeNode& l = tree.nodes[static_cast<std::size_t>(n.left)];
        const TreeNode& r = tree.nodes[static_cast<std::size_t>(n.right)];
        EXPECT_EQ(l.counts[0] + r.counts[0], n.counts[0]);
        EXPECT_EQ(l.counts[1] + r.counts[1], n.counts[1]);
        EXPECT_GT(n.weighted_decrease, 0.0);
        stack.push_back({n.left, depth + 1});
        stack.push_back({n.right, depth + 1});
      }
    }
  }
}

TEST(Forest, ProbabilitiesStayInUnitInterval) {
  const Toy t = separable(100, 5, 13);
  const ForestModel m = train_forest(t.x, t.y, small_cfg(14));
  std::mt19937_64 rng(15);
  std::normal_distribution<double> g(0.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(5);
    for (double& v : x) v = g(rng);
    const double p = predict_forest(m, x);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(Forest, UnanimousTreesGiveOne) {
  ForestModel m;
  m.n_features = 1;
  Tree leaf;
  leaf.nodes.push_back(TreeNode{});
  leaf.nodes[0].counts[1] = 3;
  m.trees.assign(5, leaf);
  const std::vector<double> x{0.0};
  EXPECT_EQ(predict_forest(m, x), 1.0);
  // Leaf ties go to class 1.
  m.trees[0].nodes[0].counts[0] = 3;
  EXPECT_EQ(predict_forest(m, x), 1.0);
}

TEST(Forest, MonotoneTransformKeepsPredictions) {
  const Toy t = separable(80, 4, 16);
  Toy warped = t;
  for (std::size_t i = 0; i < warped.x.n; ++i) {
    double& v = warped.x.row(i)[2];
    v = std::exp(v) * 3.0 + 1.0;
    double& w = warped.x.row(i)[0];
    w = w * w * w;
  }
  ForestConfig cfg = small_cfg(17, 20);
  cfg.mtry = 2;
  const ForestModel a = train_forest(t.x, t.y, cfg);
  const ForestModel b = train_forest(warped.x, warped.y, cfg);
  for (std::size_t i = 0; i < t.x.n; ++i) {
    EXPECT_EQ(predict_forest(a, t.x.row(i)) >= 0.5, predict_forest(b, warped.x.row(i)) >= 0.5);
  }
}

TEST(Forest, Errors) {
  const Toy t = separable(10, 3, 18);
  std::vector<int> same(10, 1);
  testutil::expect_errc(Errc::SingleClass, [&] { train_forest(t.x, same, small_cfg(1)); });
  testutil::expect_errc(Errc::EmptyData, [&] { train_forest(Samples(), {}, small_cfg(1)); });
  ForestConfig cfg = small_cfg(1);
  cfg.mtry = 4;
  testutil::expect_errc(Errc::InvalidArgument, [&] { train_forest(t.x, t.y, cfg); });
  cfg = small_cfg(1);
  cfg.n_trees = 0;
  testutil::expect_errc(Errc::InvalidArgument, [&] { train_forest(t.x, t.y, cfg); });
  const ForestModel m = train_forest(t.x, t.y, small_cfg(1));
  const std::vector<double> wrong(2, 0.0);
  testutil::expect_errc(Errc::DimensionMismatch, [&] { predict_forest(m, wrong); });
}

TEST(Mdi, SeparatingFeatureDominates) {
  const Toy t = separable(300, 10, 19);
  ForestConfig cfg = small_cfg(20, 100);
  cfg.mtry = 10;
  const auto imp = mdi_importance(train_forest(t.x, t.y, cfg));
  EXPECT_GT(imp[0], 0.9);
  EXPECT_NEAR(std::accumulate(imp.begin(), imp.end(), 0.0), 1.0, 1e-9);
}

TEST(Mdi, UnusedFeatureScoresZero) {
  Toy t = separable(200, 4, 21);
  // Constant column can never be split on.
  for (std::size_t i = 0; i < t.x.n; ++i) t.x.row(i)[3] = 5.0;
  const auto imp = mdi_importance(train_forest(t.x, t.y, small_cfg(22)));
  EXPECT_EQ(imp[3], 0.0);
  EXPECT_NEAR(std::accumulate(imp.begin(), imp.end(), 0.0), 1.0, 1e-9);
}

TEST(Mdi, MatchesHandComputedStump) {
  // Six distinct points, perfectly split by feature 1 at the root.
  Samples x(6, 2);
  const double f0[] = {0.3, 0.1, 0.5, 0.2, 0.6, 0.4};
  const double f1[] = {-3, -2, -1, 1, 2, 3};
  std::vector<int> y{0, 0, 0, 1, 1, 1};
  for (std::size_t i = 0; i < 6; ++i) {
    x.row(i)[0] = f0[i];
    x.row(i)[1] = f1[i];
  }
  ForestConfig cfg = small_cfg(23, 1);
  cfg.mtry = 2;
  cfg.min_leaf = 1;
  const ForestModel m = train_forest(x, y, cfg);
  const TreeNode& root = m.trees[0].nodes[0];
  ASSERT_GE(root.feature, 0);
  const double n0 = root.counts[0], n1 = root.counts[1];
  const double g = 1.0 - (n0 * n0 + n1 * n1) / ((n0 + n1) * (n0 + n1));
  if (root.feature == 1) {
    // A perfect split removes all impurity at weight 1.
    EXPECT_NEAR(root.weighted_decrease, g, 1e-12);
  }
  EXPECT_NEAR(mdi_importance(m)[0] + mdi_importance(m)[1], 1.0, 1e-12);
}

// ---------------------------------------------------------------------------

namespace {

struct Planted {
  Samples x;
  std::vector<int> y;
  std::vector<std::string> subjects;
};

/// 30 subjects x 8 segments, 64 features; only feature `order` carries the
/// class, shifted by `strength` standard deviations.
Planted planted(std::size_t order, double strength, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Planted p{Samples(240, 64), {}, {}};
  for (std::size_t s = 0; s < 30; ++s) {
    const int label = static_cast<int>(s % 2);
    for (std::size_t k = 0; k < 8; ++k) {
      const std::size_t i = s * 8 + k;
      for (std::size_t f = 0; f < 64; ++f) p.x.row(i)[f] = g(rng);
      if (order < 64) p.x.row(i)[order] += label ? strength : -strength;
      p.y.push_back(label);
      p.subjects.push_back("s" + std::to_string(s));
    }
  }
  return p;
}

}  // namespace

TEST(KfoldImportance, PlantedOrderRanksFirst) {
  const Planted p = planted(11, 1.0, 24);
  ForestConfig cfg = small_cfg(25, 100);
  const ImportanceReport r = kfold_importance(p.x, p.y, p.subjects, 5, cfg);
  EXPECT_EQ(r.ranking.front(), 11u);
  std::size_t hits = 0;
  for (std::size_t top : r.fold_top) hits += top == 11;
  EXPECT_GE(hits, 4u);
}

TEST(KfoldImportance, FoldInvariants) {
  const Planted p = planted(11, 1.0, 26);
  const ImportanceReport r = kfold_importance(p.x, p.y, p.subjects, 5, small_cfg(27, 30));
  ASSERT_EQ(r.raw.size(), 5u);
  for (std::size_t f = 0; f < 5; ++f) {
    EXPECT_NEAR(std::accumulate(r.raw[f].begin(), r.raw[f].end(), 0.0), 1.0, 1e-9);
    double mean = 0.0, sq = 0.0;
    for (double z : r.z[f]) {
      mean += z / 64.0;
      sq += z * z / 64.0;
    }
    EXPECT_LT(std::abs(mean), 1e-9);
    EXPECT_NEAR(std::sqrt(sq - mean * mean), 1.0, 1e-6);
  }
  std::vector<std::size_t> sorted = r.ranking;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t j = 0; j < 64; ++j) EXPECT_EQ(sorted[j], j);
  for (std::size_t i = 1; i < 64; ++i) EXPECT_GE(r.mean_z[r.ranking[i - 1]], r.mean_z[r.ranking[i]]);

  const std::string csv = importance_csv(r);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 1u + 10u);
  EXPECT_EQ(importance_json(r)["ranking"].size(), 64u);
}

TEST(KfoldImportance, PureNoiseRarelyLooksSignificant) {
  std::size_t calm = 0;
  const std::size_t runs = 20;
  for (std::size_t run = 0; run < runs; ++run) {
    const Planted p = planted(64, 0.0, 100 + static_cast<unsigned>(run));
    const ImportanceReport r = kfold_importance(p.x, p.y, p.subjects, 5, small_cfg(run, 30));
    calm += *std::max_element(r.mean_z.begin(), r.mean_z.end()) < 3.0;
  }
  EXPECT_GE(static_cast<double>(calm) / runs, 0.95);
}

TEST(KfoldImportance, SubjectsNeverSplitAcrossFolds) {
  // A subject whose segments straddled folds would leak; fold accuracy on a
  // subject-identity-only signal must therefore stay near chance.
  std::mt19937_64 rng(28);
  std::normal_distribution<double> g(0.0, 1.0);
  Planted p{Samples(200, 8), {}, {}};
  for (std::size_t s = 0; s < 20; ++s) {
    std::vector<double> fingerprint(8);
    for (double& v : fingerprint) v = 5.0 * g(rng);
    for (std::size_t k = 0; k < 10; ++k) {
      for (std::size_t f = 0; f < 8; ++f) p.x.row(s * 10 + k)[f] = fingerprint[f] + 0.01 * g(rng);
      p.y.push_back(static_cast<int>(s % 2));
      p.subjects.push_back("s" + std::to_string(s));
    }
  }
  const ImportanceReport r = kfold_importance(p.x, p.y, p.subjects, 5, small_cfg(29, 30));
  double mean_acc = 0.0;
  for (double a : r.fold_accuracy) mean_acc += a / 5.0;
  EXPECT_LT(mean_acc, 0.85);
}

TEST(KfoldImportance, Errors) {
  const Planted p = planted(11, 1.0, 30);
  testutil::expect_errc(Errc::InvalidArgument,
                        [&] { kfold_importance(p.x, p.y, p.subjects, 1, small_cfg(1)); });
  std::vector<std::string> few(p.x.n, "only");
  testutil::expect_errc(Errc::InvalidArgument,
                        [&] { kfold_importance(p.x, p.y, few, 5, small_cfg(1)); });
  std::vector<int> short_y(3, 0);
  testutil::expect_errc(Errc::LengthMismatch,
                        [&] { kfold_importance(p.x, short_y, p.subjects, 5, small_cfg(1)); });
}
