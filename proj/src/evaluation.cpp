// src/evaluation.cpp

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
#include <cstdio>
#include <map>
#include <sstream>

#include "vocalscreen/dataset.hpp"
#include "vocalscreen/error.hpp"
#include "vocalscreen/io_util.hpp"

namespace vocalscreen {

using nlohmann::json;

Metrics compute_metrics(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(preds.size()) + " predictions for " +
                                          std::to_string(labels.size()) + " labels");
  }
  if (preds.empty()) throw Error(Errc::EmptyPredictions, "no predictions to score");
  Metrics m;
  Confusion& c = m.confusion;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if ((preds[i] != 0 && preds[i] != 1) || (labels[i] != 0 && labels[i] != 1)) {
      throw Error(Errc::InvalidLabel, "labels and predictions must be 0 or 1");
    }
    if (preds[i] == 1) {
      (labels[i] == 1 ? c.tp : c.fp)++;
    } else {
      (labels[i] == 1 ? c.fn : c.tn)++;
    }
  }
  const auto d = [](std::size_t x) { return static_cast<double>(x); };
  m.accuracy = d(c.tp + c.tn) / d(preds.size());
  m.precision = c.tp + c.fp > 0 ? d(c.tp) / d(c.tp + c.fp) : 0.0;
  m.recall = c.tp + c.fn > 0 ? d(c.tp) / d(c.tp + c.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

json metrics_to_json(const Metrics& m) {
  return {{"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"confusion",
           {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"fn", m.confusion.fn}, {"tn", m.confusion.tn}}}};
}

int aggregate_subject(std::span<const double> probs) {
  if (probs.empty()) throw Error(Errc::EmptyPredictions, "subject has no segment predictions");
  std::size_t positive = 0;
  for (double p : probs) positive += p >= 0.5;
  return 2 * positive >= probs.size() ? 1 : 0;
}

std::vector<SubjectPrediction> aggregate_subjects(std::span<const SegmentRecord> records,
                                                  std::span<const double> probs) {
  if (records.size() != probs.size()) {
    throw Error(Errc::LengthMismatch, "one probability per segment record required");
  }
  std::vector<SubjectPrediction> out;
  std::map<std::string, std::size_t> slot;
  std::vector<std::vector<double>> grouped;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto [it, fresh] = slot.emplace(records[i].subject_id, out.size());
    if (fresh) {
      out.push_back({records[i].subject_id, records[i].label, 0, 0});
      grouped.emplace_back();
    }
    grouped[it->second].push_back(probs[i]);
  }
  for (std::size_t s = 0; s < out.size(); ++s) {
    out[s].predicted = aggregate_subject(grouped[s]);
    out[s].segments = grouped[s].size();
  }
  return out;
}

AnnotationDoc annotate(std::string recording_id, std::span<const TimedPrediction> preds,
                       double segment_seconds) {
  if (!(segment_seconds > 0.0)) throw Error(Errc::InvalidArgument, "segment length must be positive");
  std::vector<TimedPrediction> sorted(preds.begin(), preds.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
  AnnotationDoc doc;
  doc.recording_id = std::move(recording_id);
  std::size_t merged = 0;
  for (const auto& p : sorted) {
    const int label = p.probability >= 0.5 ? 1 : 0;
    const double end = p.start_s + segment_seconds;
    if (!doc.spans.empty()) {
      AnnotationSpan& last = doc.spans.back();
      if (p.start_s < last.end_s - 1e-9) {
        throw Error(Errc::InvalidArgument, "segment predictions overlap");
      }
      if (last.label == label && std::abs(p.start_s - last.end_s) <= 1e-9) {
        ++merged;
        last.probability += (p.probability - last.probability) / static_cast<double>(merged);
        last.end_s = end;
        continue;
      }
    }
    doc.spans.push_back({p.start_s, end, label, p.probability});
    merged = 1;
  }
  return doc;
}

json annotation_to_json(const AnnotationDoc& doc) {
  json spans = json::array();
  for (const auto& s : doc.spans) {
    spans.push_back({{"start_s", s.start_s},
                     {"end_s", s.end_s},
                     {"label", s.label},
                     {"probability", s.probability}});
  }
  return {{"recording_id", doc.recording_id}, {"spans", std::move(spans)}};
}

std::string annotation_svg(const AnnotationDoc& doc) {
  constexpr double kPxPerSecond = 40.0;
  constexpr int kHeight = 40;
  const double total = doc.spans.empty() ? 0.0 : doc.spans.back().end_s;
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total * kPxPerSecond
     << "\" height=\"" << kHeight + 20 << "\">\n";
  os << "  <title>" << doc.recording_id << "</title>\n";
  for (const auto& s : doc.spans) {
    os << "  <rect x=\"" << s.start_s * kPxPerSecond << "\" y=\"0\" width=\""
       << (s.end_s - s.start_s) * kPxPerSecond << "\" height=\"" << kHeight << "\" fill=\""
       << (s.label == 1 ? "#d62728" : "#2ca02c") << "\"><title>" << s.start_s << "-" << s.end_s
       << " s p=" << s.probability << "</title></rect>\n";
  }
  os << "  <text x=\"2\" y=\"" << kHeight + 15 << "\" font-size=\"12\">" << total << " s</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string vectors_csv(const FeatureDataset& ds, Axis axis) {
  const std::size_t n = axis == Axis::F ? ds.rows : ds.cols;
  const char* axis_name = axis == Axis::F ? "F" : "T";
  std::string out = "subject_id,label,kind,axis";
  for (std::size_t i = 0; i < n; ++i) out += ",v" + std::to_string(i);
  out += '\n';
  char buf[32];
  for (std::size_t s = 0; s < ds.size(); ++s) {
    const auto vec = axis == Axis::F ? f_vector(ds.matrices[s]) : t_vector(ds.matrices[s]);
    out += ds.records[s].subject_id + "," + std::to_string(ds.records[s].label) + "," +
           std::string(to_string(ds.kind)) + "," + axis_name;
    for (double v : vec) {
      std::snprintf(buf, sizeof buf, ",%.9g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void export_vectors(const FeatureDataset& ds, Axis axis, const std::filesystem::path& path) {
  write_file_atomic(path, vectors_csv(ds, axis));
}

}  // namespace vocalscreen
