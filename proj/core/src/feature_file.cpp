// Copyright 2026 The ProCC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "procc/feature_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace procc {

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw DataError("format_real: conversion failed");
  return std::string(buf, ptr);
}

double parse_real(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError("invalid real '" + std::string(text) + "'");
  }
  return value;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

int parse_int(std::string_view text, const std::string& where) {
  int value = 0;
  text = trim(text);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError(where + ": invalid integer '" + std::string(text) + "'");
  }
  return value;
}

enum class Section {
  kNone,
  kStates,
  kObjects,
  kSeen,
  kValUnseen,
  kTestUnseen,
  kValSeen,
  kTestSeen,
  kRecords
};

Section parse_section(std::string_view header, const std::string& where) {
  if (header == "[states]") return Section::kStates;
  if (header == "[objects]") return Section::kObjects;
  if (header == "[seen_pairs]") return Section::kSeen;
  if (header == "[val_unseen_pairs]") return Section::kValUnseen;
  if (header == "[test_unseen_pairs]") return Section::kTestUnseen;
  if (header == "[val_seen_pairs]") return Section::kValSeen;
  if (header == "[test_seen_pairs]") return Section::kTestSeen;
  if (header == "[records]") return Section::kRecords;
  throw DataError(where + ": unknown section " + std::string(header));
}

Pair parse_pair_line(std::string_view line, const std::string& where) {
  std::istringstream ss{std::string(line)};
  std::string a, b, extra;
  if (!(ss >> a >> b) || (ss >> extra)) {
    throw DataError(where + ": expected 'state_index object_index', got '" + std::string(line) + "'");
  }
  return Pair{parse_int(a, where), parse_int(b, where)};
}

std::optional<int> parse_label(std::string_view text, std::size_t n_classes, const char* kind,
                               const std::string& where) {
  const int v = parse_int(text, where);
  if (v == -1) return std::nullopt;
  if (v < 0 || static_cast<std::size_t>(v) >= n_classes) {
    throw DataError(where + ": unknown " + kind + " index " + std::to_string(v) + " (have " +
                    std::to_string(n_classes) + ")");
  }
  return v;
}

void write_pairs(std::ostream& out, const char* header, const PairSet& pairs) {
  out << header << '\n';
  for (const Pair& p : pairs) out << p.state << ' ' << p.object << '\n';
}

}  // namespace

LoadedData parse_features(std::istream& in, const std::string& source_name) {
  LoadedData result;
  SplitManifest& manifest = result.manifest;
  Dataset& dataset = result.dataset;

  std::string line;
  std::size_t line_no = 0;
  auto where = [&] { return source_name + ":" + std::to_string(line_no); };

  // Header.
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::string_view prefix = "czslfeat v1 d=";
    if (!t.starts_with(prefix)) throw DataError(where() + ": malformed header '" + std::string(t) + "'");
    const int d = parse_int(t.substr(prefix.size()), where());
    if (d <= 0) throw DataError(where() + ": feature dimension must be positive");
    dataset.feature_dim = static_cast<std::size_t>(d);
    have_header = true;
    break;
  }
  if (!have_header) throw DataError(source_name + ": missing 'czslfeat v1 d=<dim>' header");

  Section section = Section::kNone;
  PairSet val_seen, test_seen;
  bool have_val_seen = false, have_test_seen = false;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      section = parse_section(t, where());
      if (section == Section::kValSeen) have_val_seen = true;
      if (section == Section::kTestSeen) have_test_seen = true;
      continue;
    }
    switch (section) {
      case Section::kNone:
        throw DataError(where() + ": content outside any section");
      case Section::kStates:
        manifest.state_names.emplace_back(t);
        break;
      case Section::kObjects:
        manifest.object_names.emplace_back(t);
        break;
      case Section::kSeen:
        manifest.seen_pairs.insert(parse_pair_line(t, where()));
        break;
      case Section::kValUnseen:
        manifest.val_unseen_pairs.insert(parse_pair_line(t, where()));
        break;
      case Section::kTestUnseen:
        manifest.test_unseen_pairs.insert(parse_pair_line(t, where()));
        break;
      case Section::kValSeen:
        val_seen.insert(parse_pair_line(t, where()));
        break;
      case Section::kTestSeen:
        test_seen.insert(parse_pair_line(t, where()));
        break;
      case Section::kRecords: {
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
          const std::size_t comma = t.find(',', start);
          fields.push_back(trim(t.substr(start, comma == std::string_view::npos ? comma : comma - start)));
          if (comma == std::string_view::npos) break;
          start = comma + 1;
        }
        if (fields.size() != 4 + dataset.feature_dim) {
          throw DataError(where() + ": record has " +
                          std::to_string(fields.size() < 4 ? 0 : fields.size() - 4) +
                          " feature values, expected d=" + std::to_string(dataset.feature_dim));
        }
        FeatureRecord rec;
        rec.id = std::string(fields[0]);
        try {
          rec.split = parse_split(fields[1]);
        } catch (const DataError& e) {
          throw DataError(where() + ": " + e.what());
        }
        rec.label.state = parse_label(fields[2], manifest.n_states(), "state", where());
        rec.label.object = parse_label(fields[3], manifest.n_objects(), "object", where());
        if (!rec.label.state && !rec.label.object) {
          throw DataError(where() + ": record '" + rec.id + "' has neither label");
        }
        rec.feature.reserve(dataset.feature_dim);
        for (std::size_t i = 4; i < fields.size(); ++i) {
          double v = 0.0;
          try {
            v = parse_real(fields[i]);
          } catch (const DataError& e) {
            throw DataError(where() + ": " + e.what());
          }
          if (!std::isfinite(v)) throw DataError(where() + ": non-finite feature value");
          rec.feature.push_back(v);
        }
        dataset.records.push_back(std::move(rec));
        break;
      }
    }
  }

  if (have_val_seen) manifest.val_seen_pairs = std::move(val_seen);
  if (have_test_seen) manifest.test_seen_pairs = std::move(test_seen);
  manifest.validate();

  // Derive per-split seen subsets from the records when not declared.
  for (Split split : {Split::kVal, Split::kTest}) {
    std::optional<PairSet>& target =
        split == Split::kVal ? manifest.val_seen_pairs : manifest.test_seen_pairs;
    if (target || dataset.count(split) == 0) continue;
    PairSet derived;
    for (const FeatureRecord& rec : dataset.records) {
      if (rec.split != split || !rec.label.complete()) continue;
      const Pair p{*rec.label.state, *rec.label.object};
      if (manifest.seen_pairs.contains(p)) derived.insert(p);
    }
    target = std::move(derived);
  }

  for (const FeatureRecord& rec : dataset.records) {
    if (!rec.label.complete()) continue;
    const Pair p{*rec.label.state, *rec.label.object};
    const bool known = rec.split == Split::kTrain ? manifest.seen_pairs.contains(p)
                                                  : manifest.closed_pairs(rec.split).contains(p);
    if (!known) {
      throw DataError(source_name + ": record '" + rec.id + "' has pair (" +
                      std::to_string(p.state) + "," + std::to_string(p.object) +
                      ") that the manifest does not list for split " +
                      std::string(to_string(rec.split)));
    }
  }
  return result;
}

LoadedData load_features(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open feature file " + path.string());
  return parse_features(in, path.string());
}

void write_features(std::ostream& out, const Dataset& dataset, const SplitManifest& manifest) {
  out << "czslfeat v1 d=" << dataset.feature_dim << '\n';
  out << "[states]\n";
  for (const auto& name : manifest.state_names) out << name << '\n';
  out << "[objects]\n";
  for (const auto& name : manifest.object_names) out << name << '\n';
  write_pairs(out, "[seen_pairs]", manifest.seen_pairs);
  write_pairs(out, "[val_unseen_pairs]", manifest.val_unseen_pairs);
  write_pairs(out, "[test_unseen_pairs]", manifest.test_unseen_pairs);
  if (manifest.val_seen_pairs) write_pairs(out, "[val_seen_pairs]", *manifest.val_seen_pairs);
  if (manifest.test_seen_pairs) write_pairs(out, "[test_seen_pairs]", *manifest.test_seen_pairs);
  out << "[records]\n";
  for (const FeatureRecord& rec : dataset.records) {
    out << rec.id << ',' << to_string(rec.split) << ',' << rec.label.state.value_or(-1) << ','
        << rec.label.object.value_or(-1);
    for (double v : rec.feature) out << ',' << format_real(v);
    out << '\n';
  }
}

void write_features(const std::filesystem::path& path, const Dataset& dataset,
                    const SplitManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write feature file " + path.string());
  write_features(out, dataset, manifest);
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace procc
