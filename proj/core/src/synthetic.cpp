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

#include "procc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

namespace procc {

std::string_view to_string(FeasibilityStructure s) {
  return s == FeasibilityStructure::kRandom ? "random" : "object_state";
}

FeasibilityStructure parse_feasibility_structure(std::string_view text) {
  if (text == "random") return FeasibilityStructure::kRandom;
  if (text == "object_state") return FeasibilityStructure::kObjectState;
  throw std::invalid_argument("unknown feasibility structure '" + std::string(text) + "'");
}

namespace {

std::string indexed_name(const char* stem, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%02zu", stem, i);
  return buf;
}

std::vector<Pair> feasible_pairs(const SyntheticWorldConfig& cfg, std::mt19937_64& rng) {
  std::vector<Pair> out;
  if (cfg.structure == FeasibilityStructure::kObjectState) {
    std::vector<int> perm(cfg.n_states);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::size_t k = std::min(cfg.states_per_object, cfg.n_states);
    for (std::size_t o = 0; o < cfg.n_objects; ++o)
      for (std::size_t j = 0; j < k; ++j)
        out.push_back(Pair{perm[(k * o + j) % cfg.n_states], static_cast<int>(o)});
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  std::vector<Pair> grid;
  for (std::size_t s = 0; s < cfg.n_states; ++s)
    for (std::size_t o = 0; o < cfg.n_objects; ++o)
      grid.push_back(Pair{static_cast<int>(s), static_cast<int>(o)});
  std::shuffle(grid.begin(), grid.end(), rng);
  const auto want = static_cast<std::size_t>(
      std::llround(cfg.feasibility_density * static_cast<double>(grid.size())));
  grid.resize(std::clamp<std::size_t>(want, 1, grid.size()));
  std::sort(grid.begin(), grid.end());
  return grid;
}

std::vector<double> random_vector(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(d);
  for (double& x : v) x = normal(rng);
  return v;
}

}  // namespace

SyntheticWorld generate_synthetic_world(const SyntheticWorldConfig& cfg) {
  if (cfg.n_states == 0 || cfg.n_objects == 0 || cfg.feature_dim == 0) {
    throw std::invalid_argument("synthetic world: counts and feature_dim must be positive");
  }
  if (!(cfg.feasibility_density > 0.0 && cfg.feasibility_density <= 1.0)) {
    throw std::invalid_argument("synthetic world: feasibility_density must lie in (0,1]");
  }
  if (!(cfg.seen_fraction >= 0.0 && cfg.seen_fraction <= 1.0)) {
    throw std::invalid_argument("synthetic world: seen_fraction must lie in [0,1]");
  }
  if (cfg.noise_sigma < 0.0) throw std::invalid_argument("synthetic world: noise_sigma must be >= 0");
  if (cfg.structure == FeasibilityStructure::kObjectState && cfg.states_per_object == 0) {
    throw std::invalid_argument("synthetic world: states_per_object must be >= 1");
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::vector<double>> state_proto(cfg.n_states), object_proto(cfg.n_objects);
  for (auto& p : state_proto) p = random_vector(cfg.feature_dim, rng);
  for (auto& p : object_proto) p = random_vector(cfg.feature_dim, rng);

  std::vector<Pair> feasible = feasible_pairs(cfg, rng);
  if (feasible.size() < 2) {
    throw DataError("synthetic world: need at least 2 feasible pairs, got " +
                    std::to_string(feasible.size()));
  }

  // Seen pairs.
  std::vector<Pair> order = feasible;
  std::shuffle(order.begin(), order.end(), rng);
  const auto target = static_cast<std::size_t>(
      std::llround(cfg.seen_fraction * static_cast<double>(feasible.size())));
  PairSet seen;
  if (cfg.cover_primitives && target > 0) {
    std::vector<bool> state_covered(cfg.n_states), object_covered(cfg.n_objects);
    for (const Pair& p : order) {
      if (!state_covered[p.state] || !object_covered[p.object]) {
        seen.insert(p);
        state_covered[p.state] = true;
        object_covered[p.object] = true;
      }
    }
  }
  for (const Pair& p : order) {
    if (seen.size() >= target) break;
    seen.insert(p);
  }

  std::vector<Pair> unseen;
  for (const Pair& p : order)
    if (!seen.contains(p)) unseen.push_back(p);
  if (unseen.empty()) {
    throw DataError("synthetic world: configuration leaves no unseen pairs (" +
                    std::to_string(feasible.size()) + " feasible, " + std::to_string(seen.size()) +
                    " seen)");
  }
  // Extra pair goes to test.
  const std::size_t n_val = unseen.size() / 2;

  SyntheticWorld world;
  SplitManifest& m = world.manifest;
  for (std::size_t s = 0; s < cfg.n_states; ++s) m.state_names.push_back(indexed_name("state", s));
  for (std::size_t o = 0; o < cfg.n_objects; ++o) m.object_names.push_back(indexed_name("object", o));
  m.seen_pairs = seen;
  m.val_unseen_pairs.insert(unseen.begin(), unseen.begin() + static_cast<std::ptrdiff_t>(n_val));
  m.test_unseen_pairs.insert(unseen.begin() + static_cast<std::ptrdiff_t>(n_val), unseen.end());
  m.val_seen_pairs = seen;
  m.test_seen_pairs = seen;
  m.validate();

  world.feasibility = PairMask::from_pairs(cfg.n_states, cfg.n_objects, PairSet(feasible.begin(), feasible.end()));

  Dataset& ds = world.dataset;
  ds.feature_dim = cfg.feature_dim;
  std::normal_distribution<double> noise(0.0, 1.0);
  std::size_t next_id = 0;
  auto emit = [&](const Pair& p, Split split, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      FeatureRecord rec;
      char id[32];
      std::snprintf(id, sizeof(id), "r%06zu", next_id++);
      rec.id = id;
      rec.split = split;
      rec.label.state = p.state;
      rec.label.object = p.object;
      rec.feature.resize(cfg.feature_dim);
      const auto& ps = state_proto[static_cast<std::size_t>(p.state)];
      const auto& po = object_proto[static_cast<std::size_t>(p.object)];
      for (std::size_t j = 0; j < cfg.feature_dim; ++j) {
        rec.feature[j] = cfg.object_scale * po[j] + cfg.state_scale * ps[j] + cfg.noise_sigma * noise(rng);
      }
      ds.records.push_back(std::move(rec));
    }
  };
  for (const Pair& p : m.seen_pairs) emit(p, Split::kTrain, cfg.samples_per_seen_pair);
  for (const Pair& p : m.seen_pairs) emit(p, Split::kVal, cfg.eval_samples_per_pair);
  for (const Pair& p : m.val_unseen_pairs) emit(p, Split::kVal, cfg.eval_samples_per_pair);
  for (const Pair& p : m.seen_pairs) emit(p, Split::kTest, cfg.eval_samples_per_pair);
  for (const Pair& p : m.test_unseen_pairs) emit(p, Split::kTest, cfg.eval_samples_per_pair);
  return world;
}

}  // namespace procc
