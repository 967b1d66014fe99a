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

#ifndef PROCC_SYNTHETIC_HPP_
#define PROCC_SYNTHETIC_HPP_

#include <cstdint>
#include <string_view>

#include "procc/dataset.hpp"

namespace procc {

enum class FeasibilityStructure {
  // A uniformly random subset of the grid is feasible.
  kRandom,
  // Every object is compatible with `states_per_object` states drawn from a
  // shuffled state order, so the object nearly determines the state.
  kObjectState,
};

std::string_view to_string(FeasibilityStructure s);
FeasibilityStructure parse_feasibility_structure(std::string_view text);

struct SyntheticWorldConfig {
  std::size_t n_states = 16;
  std::size_t n_objects = 12;
  std::size_t feature_dim = 64;
  double feasibility_density = 0.6;
  double seen_fraction = 0.72;
  std::size_t samples_per_seen_pair = 20;
  std::size_t eval_samples_per_pair = 10;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;

  FeasibilityStructure structure = FeasibilityStructure::kRandom;
  std::size_t states_per_object = 1;
  double state_scale = 1.0;
  double object_scale = 1.0;
  // Seed the seen set with one pair per state and per object before filling.
  bool cover_primitives = true;
};

struct SyntheticWorld {
  Dataset dataset;
  SplitManifest manifest;
  PairMask feasibility;
};

/// Deterministic compositional world. A record for pair (s, o) has feature
/// object_scale * proto_o + state_scale * proto_s + N(0, noise_sigma^2).
/// Train records come from seen pairs only; val/test records from the seen
/// pairs plus that split's unseen pairs.
SyntheticWorld generate_synthetic_world(const SyntheticWorldConfig& config);

}  // namespace procc

#endif  // PROCC_SYNTHETIC_HPP_
