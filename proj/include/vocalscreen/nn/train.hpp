// include/vocalscreen/nn/train.hpp

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
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "json.hpp"
#include "vocalscreen/dataset.hpp"
#include "vocalscreen/nn/model.hpp"

namespace vocalscreen::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  /// Share of training subjects held out for early stopping.
  double val_fraction = 0.2;

  /// InvalidArgument unless every field is positive and val_fraction < 1.
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

class Adam {
 public:
  explicit Adam(std::vector<Param*> params, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);
  /// Applies the accumulated gradients; does not clear them.
  void step();
  std::size_t steps() const { return t_; }

 private:
  std::vector<Param*> params_;
  double lr_, b1_, b2_, eps_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// Samples with labels and, optionally, their segment records.
struct LabeledTensor {
  Tensor x;
  std::vector<int> y;
  std::vector<SegmentRecord> records;

  std::size_t size() const { return y.size(); }
  LabeledTensor pick(std::span<const std::size_t> idx) const;
};

/// Mutates one training sample in place before its forward pass.
using SampleHook = std::function<void(double* sample, std::mt19937_64& rng)>;

/// One optimizer step on the batch: gradients are accumulated over chunks
/// of `chunk` samples, each scaled by 1/batch. Returns the batch-mean loss.
double train_step(Model& model, Adam& opt, const Tensor& x, std::span<const int> y, std::size_t chunk = 8);

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double val_f1 = 0.0;
};

struct FitReport {
  std::vector<EpochStats> epochs;
  /// 1-based; the restored weights come from this epoch.
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  bool has_test = false;
  Metrics test_segment;
  Metrics test_subject;
  std::vector<double> test_probabilities;
  std::vector<SubjectPrediction> test_subjects;
};

nlohmann::json report_to_json(const FitReport& r);

/// Adam on shuffled mini-batches with early stopping on validation F1. A
/// strictly higher F1 resets patience; an equal F1 with lower validation
/// loss moves the best epoch but does not reset patience. Best weights are
/// restored before the optional test evaluation.
FitReport fit(Model& model, const LabeledTensor& train, const LabeledTensor& val, const LabeledTensor* test,
              const TrainConfig& cfg, const SampleHook& augment = {});

/// Segment metrics at threshold 0.5 plus subject majority votes when
/// records are present.
struct Evaluation {
  Metrics segment;
  Metrics subject;
  std::vector<double> probabilities;
  std::vector<SubjectPrediction> subjects;
};

Evaluation evaluate(Model& model, const LabeledTensor& data);

}  // namespace vocalscreen::nn
