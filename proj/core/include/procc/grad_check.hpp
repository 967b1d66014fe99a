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

#ifndef PROCC_GRAD_CHECK_HPP_
#define PROCC_GRAD_CHECK_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "procc/autodiff.hpp"
#include "procc/param_store.hpp"

namespace procc {

inline constexpr double kGradCheckTolerance = 1e-4;
inline constexpr double kGradCheckEpsilon = 1e-5;

/// Builds a scalar loss on the given tape from the store's current values.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckOptions {
  double epsilon = kGradCheckEpsilon;
  std::size_t max_coords = 64;  // every coordinate is checked when the parameter is smaller
  std::uint64_t seed = 0;
  // Denominator floor. Central differences on a loss of order 10 carry
  // rounding error near 1e-10, so tiny gradients are compared absolutely.
  double abs_floor = 1e-5;
};

/// max |analytic - fd| / max(|analytic| + |fd|, abs_floor) over sampled coordinates of
/// `name`, with central differences of `loss`. `analytic` must match the
/// parameter's shape.
double finite_diff_check(ParamStore& store, const std::string& name, const Tensor2& analytic,
                         const std::function<double()>& loss, const GradCheckOptions& options = {});

/// Runs backward once on `build` and compares the resulting gradient of `name`.
double finite_diff_check(ParamStore& store, const std::string& name, const LossBuilder& build,
                         const GradCheckOptions& options = {});

struct GradCheckEntry {
  std::string component;
  std::string parameter;
  double max_rel_error = 0.0;
  bool passed = false;
};

/// Finite-difference suite over every differentiable op, each MLP layer, both
/// CPM units, the three training losses and the trainable backbone, on seeded
/// 4-sample batches.
std::vector<GradCheckEntry> run_gradient_suite(std::uint64_t seed = 0,
                                               double tolerance = kGradCheckTolerance);

}  // namespace procc

#endif  // PROCC_GRAD_CHECK_HPP_
