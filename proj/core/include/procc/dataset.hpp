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

#ifndef PROCC_DATASET_HPP_
#define PROCC_DATASET_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace procc {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Split { kTrain, kVal, kTest };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

/// A (state, object) composition by class index.
struct Pair {
  int state = 0;
  int object = 0;
  auto operator<=>(const Pair&) const = default;
};

using PairSet = std::set<Pair>;

/// Boolean matrix over the |S|×|O| composition grid.
class PairMask {
 public:
  PairMask() = default;
  PairMask(std::size_t n_states, std::size_t n_objects, bool fill = false)
      : n_states_(n_states), n_objects_(n_objects), cells_(n_states * n_objects, fill ? 1 : 0) {}

  static PairMask from_pairs(std::size_t n_states, std::size_t n_objects, const PairSet& pairs);

  std::size_t n_states() const { return n_states_; }
  std::size_t n_objects() const { return n_objects_; }
  bool operator()(std::size_t s, std::size_t o) const { return cells_[s * n_objects_ + o] != 0; }
  void set(std::size_t s, std::size_t o, bool v) { cells_[s * n_objects_ + o] = v ? 1 : 0; }
  bool contains(const Pair& p) const {
    return (*this)(static_cast<std::size_t>(p.state), static_cast<std::size_t>(p.object));
  }
  std::size_t count() const;

  friend bool operator==(const PairMask&, const PairMask&) = default;

 private:
  std::size_t n_states_ = 0;
  std::size_t n_objects_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Possibly partial primitive labels. At least one side is present.
struct LabelPair {
  std::optional<int> state;
  std::optional<int> object;

  bool complete() const { return state.has_value() && object.has_value(); }
  friend bool operator==(const LabelPair&, const LabelPair&) = default;
};

struct FeatureRecord {
  std::string id;
  std::vector<double> feature;
  LabelPair label;
  Split split = Split::kTrain;

  friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

struct SplitManifest {
  std::vector<std::string> state_names;
  std::vector<std::string> object_names;
  PairSet seen_pairs;
  PairSet val_unseen_pairs;
  PairSet test_unseen_pairs;
  // Seen pairs that occur in the validation / test splits. When absent the
  // whole seen set stands in.
  std::optional<PairSet> val_seen_pairs;
  std::optional<PairSet> test_seen_pairs;

  std::size_t n_states() const { return state_names.size(); }
  std::size_t n_objects() const { return object_names.size(); }
  std::size_t full_space() const { return n_states() * n_objects(); }

  const PairSet& seen_in(Split split) const;
  const PairSet& unseen_in(Split split) const;
  /// Candidate pairs of the closed-world setting for a split: its seen plus unseen pairs.
  PairSet closed_pairs(Split split) const;

  /// Throws DataError on out-of-range or overlapping pair sets.
  void validate() const;

  friend bool operator==(const SplitManifest&, const SplitManifest&) = default;
};

struct Dataset {
  std::size_t feature_dim = 0;
  std::vector<FeatureRecord> records;

  std::vector<std::size_t> indices(Split split) const;
  std::size_t count(Split split) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Ratio of the open-world output space to the closed-world test space.
double openworld_expansion_ratio(const SplitManifest& manifest);

/// Drop state / object labels at random, keeping each with the given probability.
/// The two keep events are coupled to overlap as little as possible; a record
/// that would still lose both keeps one, chosen by a fair coin. When
/// `only_split` is set, records of other splits are left untouched.
Dataset mask_partial_labels(const Dataset& dataset, double keep_state_fraction,
                            double keep_object_fraction, std::uint64_t seed,
                            std::optional<Split> only_split = std::nullopt);

/// Seeded shuffle of one split into batches of record indices; the final short
/// batch is kept.
std::vector<std::vector<std::size_t>> batch_iterator(const Dataset& dataset, Split split,
                                                     std::size_t batch_size, std::uint64_t seed,
                                                     std::uint64_t epoch);

}  // namespace procc

#endif  // PROCC_DATASET_HPP_
