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

#ifndef PROCC_OPTIMIZER_HPP_
#define PROCC_OPTIMIZER_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "procc/param_store.hpp"

namespace procc {

enum class OptimizerMode { kAdam, kPlain };

std::string_view to_string(OptimizerMode mode);
OptimizerMode parse_optimizer_mode(std::string_view text);

struct OptimizerConfig {
  OptimizerMode mode = OptimizerMode::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment accumulators for the adaptive mode. Accumulators are created lazily
/// with the shape of the parameter they track.
struct OptimState {
  OptimizerConfig config;
  std::uint64_t step = 0;
  std::map<std::string, Tensor2, std::less<>> first_moment;
  std::map<std::string, Tensor2, std::less<>> second_moment;

  explicit OptimState(OptimizerConfig cfg = {}) : config(cfg) {}
};

/// Apply one update to every parameter in `scope`. Parameters outside the scope
/// are not read or written. Throws if an in-scope parameter has no gradient.
void optimizer_step(ParamStore& params, OptimState& state, const ParamScope& scope);

}  // namespace procc

#endif  // PROCC_OPTIMIZER_HPP_
