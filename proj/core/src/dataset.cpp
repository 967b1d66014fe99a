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

#include "procc/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace procc {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  throw DataError("unknown split '" + std::string(text) + "'");
}

PairMask PairMask::from_pairs(std::size_t n_states, std::size_t n_objects, const PairSet& pairs) {
  PairMask mask(n_states, n_objects);
  for (const Pair& p : pairs) mask.set(static_cast<std::size_t>(p.state), static_cast<std::size_t>(p.object), true);
  return mask;
}

std::size_t PairMask::count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

const PairSet& SplitManifest::seen_in(Split split) const {
  if (split == Split::kVal && val_seen_pairs) return *val_seen_pairs;
  if (split == Split::kTest && test_seen_pairs) return *test_seen_pairs;
  return seen_pairs;
}

const PairSet& SplitManifest::unseen_in(Split split) const {
  static const PairSet kEmpty;
  if (split == Split::kVal) return val_unseen_pairs;
  if (split == Split::kTest) return test_unseen_pairs;
  return kEmpty;
}

PairSet SplitManifest::closed_pairs(Split split) const {
  PairSet out = seen_in(split);
  const PairSet& unseen = unseen_in(split);
  out.insert(unseen.begin(), unseen.end());
  return out;
}

namespace {

std::string pair_string(const Pair& p) {
  return "(" + std::to_string(p.state) + "," + std::to_string(p.object) + ")";
}

void check_range(const PairSet& pairs, std::size_t n_states, std::size_t n_objects,
                 const char* section) {
  for (const Pair& p : pairs) {
    if (p.state < 0 || static_cast<std::size_t>(p.state) >= n_states || p.object < 0 ||
        static_cast<std::size_t>(p.object) >= n_objects) {
      throw DataError(std::string("manifest: pair ") + pair_string(p) + " in [" + section +
                      "] is outside the " + std::to_string(n_states) + "x" +
                      std::to_string(n_objects) + " grid");
    }
  }
}

void check_disjoint(const PairSet& a, const PairSet& b, const char* a_name, const char* b_name) {
  for (const Pair& p : a) {
    if (b.contains(p)) {
      throw DataError(std::string("manifest: pair ") + pair_string(p) + " appears in both [" +
                      a_name + "] and [" + b_name + "]");
    }
  }
}

}  // namespace

void SplitManifest::validate() const {
  const std::size_t ns = n_states();
  const std::size_t no = n_objects();
  check_range(seen_pairs, ns, no, "seen_pairs");
  check_range(val_unseen_pairs, ns, no, "val_unseen_pairs");
  check_range(test_unseen_pairs, ns, no, "test_unseen_pairs");
  check_disjoint(seen_pairs, val_unseen_pairs, "seen_pairs", "val_unseen_pairs");
  check_disjoint(seen_pairs, test_unseen_pairs, "seen_pairs", "test_unseen_pairs");
  check_disjoint(val_unseen_pairs, test_unseen_pairs, "val_unseen_pairs", "test_unseen_pairs");
  for (const auto* subset : {&val_seen_pairs, &test_seen_pairs}) {
    if (!*subset) continue;
    const char* name = subset == &val_seen_pairs ? "val_seen_pairs" : "test_seen_pairs";
    check_range(**subset, ns, no, name);
    for (const Pair& p : **subset) {
      if (!seen_pairs.contains(p)) {
        throw DataError(std::string("manifest: pair ") + pair_string(p) + " in [" + name +
                        "] is not a seen pair");
      }
    }
  }
}

std::vector<std::size_t> Dataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].split == split) out.push_back(i);
  return out;
}

std::size_t Dataset::count(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [split](const FeatureRecord& r) { return r.split == split; }));
}

double openworld_expansion_ratio(const SplitManifest& manifest) {
  const std::size_t closed = manifest.closed_pairs(Split::kTest).size();
  if (closed == 0) throw DataError("openworld_expansion_ratio: empty closed-world test space");
  return static_cast<double>(manifest.full_space()) / static_cast<double>(closed);
}

Dataset mask_partial_labels(const Dataset& dataset, double keep_state_fraction,
                            double keep_object_fraction, std::uint64_t seed,
                            std::optional<Split> only_split) {
  if (keep_state_fraction < 0.0 || keep_state_fraction > 1.0 || keep_object_fraction < 0.0 ||
      keep_object_fraction > 1.0) {
    throw std::invalid_argument("mask_partial_labels: fractions must lie in [0,1]");
  }
  Dataset out = dataset;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (FeatureRecord& rec : out.records) {
    if (only_split && rec.split != *only_split) continue;
    // Two draws per record regardless of outcome. One shared uniform keeps the
    // state below keep_state and the object above 1 - keep_object, so both are
    // lost only when the fractions sum to less than one.
    const double u = unit(rng);
    const bool coin = unit(rng) < 0.5;
    bool keep_state = rec.label.state.has_value() && u < keep_state_fraction;
    bool keep_object = rec.label.object.has_value() && u >= 1.0 - keep_object_fraction;
    if (!keep_state && !keep_object) {
      if (rec.label.state && rec.label.object) {
        (coin ? keep_state : keep_object) = true;
      } else {
        keep_state = rec.label.state.has_value();
        keep_object = rec.label.object.has_value();
      }
    }
    if (!keep_state) rec.label.state.reset();
    if (!keep_object) rec.label.object.reset();
  }
  return out;
}

std::vector<std::vector<std::size_t>> batch_iterator(const Dataset& dataset, Split split,
                                                     std::size_t batch_size, std::uint64_t seed,
                                                     std::uint64_t epoch) {
  if (batch_size == 0) throw std::invalid_argument("batch_iterator: batch_size must be >= 1");
  std::vector<std::size_t> order = dataset.indices(split);
  if (order.empty()) {
    throw DataError("batch_iterator: split '" + std::string(to_string(split)) + "' is empty");
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t stop = std::min(order.size(), start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return batches;
}

}  // namespace procc
