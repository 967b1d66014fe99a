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

#ifndef PROCC_LOSSES_HPP_
#define PROCC_LOSSES_HPP_

#include <span>
#include <vector>

#include "procc/autodiff.hpp"
#include "procc/dataset.hpp"
#include "procc/model.hpp"

namespace procc {

/// Raw features of a batch with per-row labels; -1 marks an absent label.
struct Batch {
  Tensor2 raw;
  std::vector<int> states;
  std::vector<int> objects;

  std::size_t size() const { return raw.rows(); }
  std::size_t state_labeled() const;
  std::size_t object_labeled() const;
};

Batch make_batch(const Dataset& dataset, std::span<const std::size_t> indices);

// Graph builders. Each returns a 1×1 loss node on `tape`.

/// Cross-entropy of the bare object head against the object labels present.
Var loss_obj(Tape& tape, const ProCCModel& model, const Batch& batch);

/// Cross-entropy of the CPC-conditioned state distribution. With
/// `freeze_object_branch` the object representation conditions the state
/// branch but receives no gradient.
Var loss_state_con(Tape& tape, const ProCCModel& model, const Batch& batch,
                   bool freeze_object_branch = true);

/// Conditioned state term plus conditioned object term, each averaged over
/// the rows that carry that label.
Var loss_vp_con(Tape& tape, const ProCCModel& model, const Batch& batch);

// Scalar conveniences (read-only evaluation).
double loss_obj_value(const ProCCModel& model, const Batch& batch);
double loss_state_con_value(const ProCCModel& model, const Batch& batch);
double loss_vp_con_value(const ProCCModel& model, const Batch& batch);

}  // namespace procc

#endif  // PROCC_LOSSES_HPP_
