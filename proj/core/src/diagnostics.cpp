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

#include "procc/diagnostics.hpp"

#include "procc/losses.hpp"

namespace procc {

std::string_view direction_tag(CpmDirection direction) {
  return direction == CpmDirection::kObjectToState ? "o2s" : "s2o";
}

ConditionalConfusion conditional_confusion(const ProCCModel& model, const Dataset& dataset, Split split,
                                           CpmDirection direction, bool use_cpc) {
  const std::vector<std::size_t> idx = dataset.indices(split);
  if (idx.empty()) throw DataError("conditional_confusion: split is empty");
  const bool by_object = direction == CpmDirection::kObjectToState;
  const std::size_t n_rows = by_object ? model.config().n_objects : model.config().n_states;
  const std::size_t n_cols = by_object ? model.config().n_states : model.config().n_objects;

  ConditionalConfusion out;
  out.direction = direction;
  out.use_cpc = use_cpc;
  out.matrix = Tensor2(n_rows, n_cols);
  std::vector<std::size_t> counts(n_rows, 0);

  const Batch batch = make_batch(dataset, idx);
  const BatchProbs probs = predict_batch(model, batch.raw, use_cpc);
  const Tensor2& target = by_object ? probs.p_state : probs.p_object;
  const std::vector<int>& cond = by_object ? batch.objects : batch.states;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    if (cond[r] < 0) continue;
    const auto row = static_cast<std::size_t>(cond[r]);
    ++counts[row];
    for (std::size_t c = 0; c < n_cols; ++c) out.matrix(row, c) += target(r, c);
  }
  out.empty_rows.assign(n_rows, false);
  for (std::size_t row = 0; row < n_rows; ++row) {
    if (counts[row] == 0) {
      out.empty_rows[row] = true;
      for (double& v : out.matrix.row(row)) v = 1.0 / static_cast<double>(n_cols);
      continue;
    }
    for (double& v : out.matrix.row(row)) v /= static_cast<double>(counts[row]);
  }
  return out;
}

double feasible_mass(const ConditionalConfusion& confusion, const PairMask& feasibility) {
  const bool by_object = confusion.direction == CpmDirection::kObjectToState;
  double total = 0.0;
  std::size_t rows = 0;
  for (std::size_t row = 0; row < confusion.matrix.rows(); ++row) {
    if (confusion.empty_rows[row]) continue;
    for (std::size_t c = 0; c < confusion.matrix.cols(); ++c) {
      const bool ok = by_object ? feasibility(c, row) : feasibility(row, c);
      if (ok) total += confusion.matrix(row, c);
    }
    ++rows;
  }
  if (rows == 0) throw DataError("feasible_mass: every row is empty");
  return total / static_cast<double>(rows);
}

}  // namespace procc
