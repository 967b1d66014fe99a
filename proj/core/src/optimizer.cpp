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

#include "procc/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace procc {

std::string_view to_string(OptimizerMode mode) {
  return mode == OptimizerMode::kAdam ? "adam" : "plain";
}

OptimizerMode parse_optimizer_mode(std::string_view text) {
  if (text == "adam") return OptimizerMode::kAdam;
  if (text == "plain" || text == "sgd") return OptimizerMode::kPlain;
  throw std::invalid_argument("unknown optimizer mode '" + std::string(text) + "'");
}

void optimizer_step(ParamStore& params, OptimState& state, const ParamScope& scope) {
  for (const auto& [name, entry] : params) {
    if (scope.contains(name) && !entry.has_grad)
      throw std::logic_error("optimizer_step: no gradient for in-scope parameter " + name);
  }
  ++state.step;
  const OptimizerConfig& cfg = state.config;
  const double lr = cfg.learning_rate;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

  for (auto& [name, entry] : params) {
    if (!scope.contains(name)) continue;
    auto& w = entry.value.data();
    const auto& g = entry.grad.data();
    if (cfg.mode == OptimizerMode::kPlain) {
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
      continue;
    }
    auto [m_it, m_new] = state.first_moment.try_emplace(name, entry.value.rows(), entry.value.cols());
    auto [v_it, v_new] = state.second_moment.try_emplace(name, entry.value.rows(), entry.value.cols());
    auto& m = m_it->second.data();
    auto& v = v_it->second.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace procc
