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

#ifndef PROCC_TESTS_TEST_UTIL_HPP_
#define PROCC_TESTS_TEST_UTIL_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>

#include "procc/dataset.hpp"
#include "procc/model.hpp"
#include "procc/synthetic.hpp"

namespace procc::testing {

inline Tensor2 random_tensor(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                             double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor2 t(rows, cols);
  for (double& v : t.data()) v = u(rng);
  return t;
}

inline void zero_params(ProCCModel& model) {
  for (auto& [name, entry] : model.params()) entry.value.fill(0.0);
}

inline ModelConfig small_model_config(std::size_t n_states, std::size_t n_objects, std::size_t raw_dim = 8,
                                      std::size_t d = 8) {
  ModelConfig c;
  c.n_states = n_states;
  c.n_objects = n_objects;
  c.raw_dim = raw_dim;
  c.embed_dim = d;
  c.n_layers = 3;
  c.cpm_kernel = 3;
  return c;
}

/// Small random-feasibility world that trains in well under a second.
inline SyntheticWorldConfig tiny_world(std::uint64_t seed = 1) {
  SyntheticWorldConfig c;
  c.n_states = 5;
  c.n_objects = 4;
  c.feature_dim = 12;
  c.feasibility_density = 0.8;
  c.seen_fraction = 0.6;
  c.samples_per_seen_pair = 6;
  c.eval_samples_per_pair = 4;
  c.noise_sigma = 0.5;
  c.seed = seed;
  return c;
}

inline ModelConfig model_for(const SyntheticWorld& w, std::size_t d = 12) {
  ModelConfig c;
  c.n_states = w.manifest.n_states();
  c.n_objects = w.manifest.n_objects();
  c.raw_dim = w.dataset.feature_dim;
  c.embed_dim = d;
  c.cpm_kernel = 3;
  return c;
}

/// Pair counts of one benchmark manifest: seen, then per split seen / unseen.
struct ManifestCounts {
  std::size_t n_states, n_objects, seen, val_seen, val_unseen, test_seen, test_unseen;
};

/// Feature-file text with the given counts and no records. Cells are laid out
/// row-major: seen pairs first, then validation unseen, then test unseen.
inline std::string manifest_text(const ManifestCounts& c) {
  std::ostringstream out;
  out << "czslfeat v1 d=2\n# generated manifest\n[states]\n";
  for (std::size_t s = 0; s < c.n_states; ++s) out << "state" << s << '\n';
  out << "[objects]\n";
  for (std::size_t o = 0; o < c.n_objects; ++o) out << "object" << o << '\n';
  auto cell = [&](std::size_t i) { return std::to_string(i / c.n_objects) + " " + std::to_string(i % c.n_objects) + "\n"; };
  out << "[seen_pairs]\n";
  for (std::size_t i = 0; i < c.seen; ++i) out << cell(i);
  out << "[val_unseen_pairs]\n";
  for (std::size_t i = 0; i < c.val_unseen; ++i) out << cell(c.seen + i);
  out << "[test_unseen_pairs]\n";
  for (std::size_t i = 0; i < c.test_unseen; ++i) out << cell(c.seen + c.val_unseen + i);
  out << "[val_seen_pairs]\n";
  for (std::size_t i = 0; i < c.val_seen; ++i) out << cell(i);
  out << "[test_seen_pairs]\n";
  for (std::size_t i = 0; i < c.test_seen; ++i) out << cell(i);
  out << "[records]\n";
  return out.str();
}

inline constexpr ManifestCounts kUtZappos{16, 12, 83, 15, 15, 18, 18};
inline constexpr ManifestCounts kMitStates{115, 245, 1262, 300, 300, 400, 400};
inline constexpr ManifestCounts kCgqa{413, 674, 5592, 1252, 1040, 888, 923};

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const std::filesystem::path p = std::filesystem::temp_directory_path() / ("procc_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace procc::testing

#endif  // PROCC_TESTS_TEST_UTIL_HPP_
