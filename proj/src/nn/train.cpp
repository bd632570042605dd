// src/nn/train.cpp

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

#include "vocalscreen/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vocalscreen/error.hpp"
#include "vocalscreen/rng.hpp"

namespace vocalscreen::nn {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || batch_size == 0 || max_epochs == 0 || patience == 0) {
    throw Error(Errc::InvalidArgument, "learning rate, batch size, epochs and patience must be positive");
  }
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw Error(Errc::InvalidArgument, "validation fraction must lie in (0, 1)");
  }
}

void to_json(json& j, const TrainConfig& c) {
  j = {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size}, {"max_epochs", c.max_epochs},
       {"patience", c.patience},           {"seed", c.seed},             {"val_fraction", c.val_fraction}};
}

void from_json(const json& j, TrainConfig& c) {
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.seed = j.value("seed", c.seed);
  c.val_fraction = j.value("val_fraction", c.val_fraction);
}

// ---------------------------------------------------------------------------

Adam::Adam(std::vector<Param*> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
  for (Param* p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& w = params_[k]->value.data;
    const auto& g = params_[k]->grad.data;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1_ * m[i] + (1.0 - b1_) * g[i];
      v[i] = b2_ * v[i] + (1.0 - b2_) * g[i] * g[i];
      w[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

// ---------------------------------------------------------------------------

LabeledTensor LabeledTensor::pick(std::span<const std::size_t> idx) const {
  LabeledTensor out;
  Shape s = x.shape;
  s[0] = idx.size();
  out.x = Tensor(s);
  const std::size_t per = x.sample_size();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(x.sample(idx[i]), per, out.x.sample(i));
    out.y.push_back(y[idx[i]]);
    if (!records.empty()) out.records.push_back(records[idx[i]]);
  }
  return out;
}

double train_step(Model& model, Adam& opt, const Tensor& x, std::span<const int> y, std::size_t chunk) {
  if (x.batch() != y.size() || y.empty()) throw Error(Errc::LengthMismatch, "one label per sample required");
  chunk = std::max<std::size_t>(chunk, 1);
  const auto n = static_cast<double>(y.size());
  model.zero_grad();
  double loss = 0.0;
  for (std::size_t first = 0; first < y.size(); first += chunk) {
    const std::size_t count = std::min(chunk, y.size() - first);
    const Tensor logits = model.forward(x.slice(first, count));
    Tensor grad;
    const double part = bce_with_logits(logits, y.subspan(first, count), &grad);
    loss += part * static_cast<double>(count) / n;
    for (double& g : grad.data) g *= static_cast<double>(count) / n;
    model.backward(grad);
  }
  if (!std::isfinite(loss)) throw Error(Errc::DivergedLoss, "training loss is not finite");
  for (Param* p : model.params()) p->grad.check_finite("gradients");
  opt.step();
  for (Param* p : model.params()) p->value.check_finite("weights");
  return loss;
}

Evaluation evaluate(Model& model, const LabeledTensor& data) {
  if (data.size() == 0) throw Error(Errc::EmptySplit, "nothing to evaluate");
  Evaluation ev;
  ev.probabilities = model.predict(data.x);
  for (double p : ev.probabilities) {
    if (!std::isfinite(p)) throw Error(Errc::DivergedLoss, "non-finite prediction");
  }
  std::vector<int> pred(ev.probabilities.size());
  std::transform(ev.probabilities.begin(), ev.probabilities.end(), pred.begin(),
                 [](double p) { return p >= 0.5 ? 1 : 0; });
  ev.segment = compute_metrics(pred, data.y);
  if (data.records.size() == data.size()) {
    ev.subjects = aggregate_subjects(data.records, ev.probabilities);
    std::vector<int> sp, sl;
    for (const auto& s : ev.subjects) {
      sp.push_back(s.predicted);
      sl.push_back(s.label);
    }
    ev.subject = compute_metrics(sp, sl);
  }
  return ev;
}

namespace {

std::vector<Buffer> snapshot(Model& model) {
  std::vector<Buffer> out;
  for (Param* p : model.params()) out.push_back(p->value.data);
  return out;
}

void restore(Model& model, const std::vector<Buffer>& saved) {
  const auto params = model.params();
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->value.data = saved[k];
}

}  // namespace

FitReport fit(Model& model, const LabeledTensor& train, const LabeledTensor& val, const LabeledTensor* test,
              const TrainConfig& cfg, const SampleHook& augment) {
  cfg.validate();
  if (train.size() == 0) throw Error(Errc::EmptySplit, "training set is empty");
  if (val.size() == 0) throw Error(Errc::EmptySplit, "validation set is empty");
  if (test && test->size() == 0) throw Error(Errc::EmptySplit, "test set is empty");

  Adam opt(model.params(), cfg.learning_rate);
  FitReport report;
  auto best = snapshot(model);
  double best_f1 = -1.0;
  double best_loss = 0.0;
  std::size_t stale = 0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, {1, epoch}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - first);
      const std::span<const std::size_t> idx(order.data() + first, count);
      LabeledTensor batch = train.pick(idx);
      if (augment) {
        for (std::size_t i = 0; i < count; ++i) {
          std::mt19937_64 rng(derive_seed(cfg.seed, {2, epoch, idx[i]}));
          augment(batch.x.sample(i), rng);
        }
      }
      loss_sum += train_step(model, opt, batch.x, batch.y) * static_cast<double>(count);
    }

    const Evaluation ev = evaluate(model, val);
    EpochStats st;
    st.epoch = epoch;
    st.train_loss = loss_sum / static_cast<double>(train.size());
    st.val_loss = bce_loss(ev.probabilities, val.y);
    st.val_accuracy = ev.segment.accuracy;
    st.val_f1 = ev.segment.f1;
    report.epochs.push_back(st);
    report.epochs_run = epoch;

    if (st.val_f1 > best_f1) {
      best_f1 = st.val_f1;
      best_loss = st.val_loss;
      report.best_epoch = epoch;
      best = snapshot(model);
      stale = 0;
    } else {
      if (st.val_f1 == best_f1 && st.val_loss < best_loss) {
        best_loss = st.val_loss;
        report.best_epoch = epoch;
        best = snapshot(model);
      }
      if (++stale >= cfg.patience) break;
    }
  }
  restore(model, best);

  if (test) {
    Evaluation ev = evaluate(model, *test);
    report.has_test = true;
    report.test_segment = ev.segment;
    report.test_subject = ev.subject;
    report.test_probabilities = std::move(ev.probabilities);
    report.test_subjects = std::move(ev.subjects);
  }
  return report;
}

json report_to_json(const FitReport& r) {
  json epochs = json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"val_loss", e.val_loss},
                      {"val_accuracy", e.val_accuracy},
                      {"val_f1", e.val_f1}});
  }
  json j{{"epochs", std::move(epochs)}, {"best_epoch", r.best_epoch}, {"epochs_run", r.epochs_run}};
  if (r.has_test) {
    json subjects = json::array();
    for (const auto& s : r.test_subjects) {
      subjects.push_back({{"subject_id", s.subject_id},
                          {"label", s.label},
                          {"predicted", s.predicted},
                          {"segments", s.segments}});
    }
    j["test"] = {{"segment", metrics_to_json(r.test_segment)},
                 {"subject", metrics_to_json(r.test_subject)},
                 {"subjects", std::move(subjects)},
                 {"probabilities", r.test_probabilities}};
  }
  return j;
}

}  // namespace vocalscreen::nn
