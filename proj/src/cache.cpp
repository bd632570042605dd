// src/cache.cpp

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

#include <charconv>
#include <cstring>
#include <limits>

#include "vocalscreen/dataset.hpp"
#include "vocalscreen/error.hpp"
#include "vocalscreen/io_util.hpp"

namespace vocalscreen {

namespace {

constexpr char kMagic[4] = {'F', 'T', 'D', 'S'};
constexpr std::size_t kHeaderBytes = 4 + 1 + 1 + 2 + 4 + 4 + 4;

std::vector<std::string_view> split_bar(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t bar = s.find('|', start);
    parts.push_back(s.substr(start, bar - start));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return parts;
}

}  // namespace

std::string SegmentRecord::encode_id() const {
  if (subject_id.find('|') != std::string::npos || recording_id.find('|') != std::string::npos) {
    throw Error(Errc::InvalidArgument, "ids may not contain '|'");
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, start_offset_s);
  return subject_id + "|" + recording_id + "|" + std::to_string(segment_index) + "|" +
         std::string(buf, res.ptr);
}

SegmentRecord SegmentRecord::decode_id(std::string_view id, int label) {
  const auto parts = split_bar(id);
  if (parts.size() != 4) {
    throw Error(Errc::InvalidArgument, "malformed segment id '" + std::string(id) + "'");
  }
  SegmentRecord r;
  r.subject_id = parts[0];
  r.recording_id = parts[1];
  r.label = label;
  const auto a = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), r.segment_index);
  const auto b = std::from_chars(parts[3].data(), parts[3].data() + parts[3].size(), r.start_offset_s);
  if (a.ec != std::errc() || b.ec != std::errc()) {
    throw Error(Errc::InvalidArgument, "malformed segment id '" + std::string(id) + "'");
  }
  return r;
}

FeatureDataset FeatureDataset::subset(const std::set<std::string>& subjects) const {
  FeatureDataset out;
  out.kind = kind;
  out.rows = rows;
  out.cols = cols;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (subjects.count(records[i].subject_id)) {
      out.records.push_back(records[i]);
      out.matrices.push_back(matrices[i]);
    }
  }
  return out;
}

std::vector<int> FeatureDataset::labels() const {
  std::vector<int> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

std::string encode_cache(const FeatureDataset& ds) {
  if (ds.records.size() != ds.matrices.size()) {
    throw Error(Errc::LengthMismatch, "records and matrices differ in count");
  }
  const std::size_t cells = ds.rows * ds.cols;
  std::string out;
  out.reserve(kHeaderBytes + ds.size() * (64 + 1 + 4 * cells));
  out.append(kMagic, 4);
  put_le<std::uint8_t>(out, kCacheVersion);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(ds.kind));
  put_le<std::uint16_t>(out, 0);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.rows));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.cols));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const FeatureMatrix& m = ds.matrices[i];
    if (m.kind != ds.kind || m.rows != ds.rows || m.cols != ds.cols) {
      throw Error(Errc::ShapeMismatch, "matrix " + std::to_string(i) + " differs in kind or shape");
    }
    const std::string id = ds.records[i].encode_id();
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
    out += id;
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(ds.records[i].label));
    for (double v : m.data) put_le<float>(out, static_cast<float>(v));
  }
  return out;
}

FeatureDataset decode_cache(std::string_view bytes) {
  ByteReader in(bytes);
  if (!in.can_read(4) || std::memcmp(in.take(4).data(), kMagic, 4) != 0) {
    throw Error(Errc::BadMagic, "not a feature cache");
  }
  if (!in.can_read(kHeaderBytes - 4)) throw Error(Errc::TruncatedFile, "cache header cut short");
  const auto version = in.get<std::uint8_t>();
  if (version != kCacheVersion) {
    throw Error(Errc::VersionMismatch, "cache version " + std::to_string(version) + ", expected " +
                                           std::to_string(kCacheVersion));
  }
  const auto kind = in.get<std::uint8_t>();
  if (kind > static_cast<std::uint8_t>(FeatureKind::Fusion)) {
    throw Error(Errc::InvalidArgument, "unknown feature kind " + std::to_string(kind));
  }
  in.get<std::uint16_t>();
  FeatureDataset ds;
  ds.kind = static_cast<FeatureKind>(kind);
  ds.rows = in.get<std::uint32_t>();
  ds.cols = in.get<std::uint32_t>();
  const std::uint32_t count = in.get<std::uint32_t>();
  const std::size_t cells = ds.rows * ds.cols;
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!in.can_read(4)) throw Error(Errc::TruncatedFile, "cache record " + std::to_string(i) + " cut short");
    const auto id_len = in.get<std::uint32_t>();
    if (!in.can_read(std::size_t{id_len} + 1 + 4 * cells)) {
      throw Error(Errc::TruncatedFile, "cache record " + std::to_string(i) + " cut short");
    }
    const std::string_view id = in.take(id_len);
    const int label = in.get<std::uint8_t>();
    if (label > 1) throw Error(Errc::InvalidLabel, "cache record label " + std::to_string(label));
    ds.records.push_back(SegmentRecord::decode_id(id, label));
    FeatureMatrix m(ds.kind, ds.rows, ds.cols);
    for (double& v : m.data) v = in.get<float>();
    ds.matrices.push_back(std::move(m));
  }
  if (in.remaining() != 0) {
    throw Error(Errc::InvalidArgument, "trailing bytes after the last cache record");
  }
  return ds;
}

void write_cache(const FeatureDataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, encode_cache(ds));
}

FeatureDataset read_cache(const std::filesystem::path& path) { return decode_cache(read_file(path)); }

}  // namespace vocalscreen
