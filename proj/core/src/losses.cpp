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

#include "procc/losses.hpp"

#include <algorithm>
#include <stdexcept>

namespace procc {

namespace {

std::vector<bool> present(const std::vector<int>& labels) {
  std::vector<bool> mask(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) mask[i] = labels[i] >= 0;
  return mask;
}

std::size_t count_present(const std::vector<int>& labels) {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int v) { return v >= 0; }));
}

}  // namespace

std::size_t Batch::state_labeled() const { return count_present(states); }
std::size_t Batch::object_labeled() const { return count_present(objects); }

Batch make_batch(const Dataset& dataset, std::span<const std::size_t> indices) {
  Batch b;
  b.raw = Tensor2(indices.size(), dataset.feature_dim);
  b.states.reserve(indices.size());
  b.objects.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const FeatureRecord& rec = dataset.records.at(indices[r]);
    if (rec.feature.size() != dataset.feature_dim) {
      throw ShapeError("make_batch: record " + rec.id + " has " + std::to_string(rec.feature.size()) +
                       " features, expected " + std::to_string(dataset.feature_dim));
    }
    std::copy(rec.feature.begin(), rec.feature.end(), b.raw.row(r).begin());
    b.states.push_back(rec.label.state.value_or(-1));
    b.objects.push_back(rec.label.object.value_or(-1));
  }
  return b;
}

Var loss_obj(Tape& tape, const ProCCModel& model, const Batch& batch) {
  if (batch.object_labeled() == 0) throw std::invalid_argument("loss_obj: batch has no object labels");
  const ForwardVars f = forward_graph(tape, model, batch.raw, ForwardOptions{false, false});
  return tape.cross_entropy(f.object_base_probs, batch.objects, present(batch.objects));
}

Var loss_state_con(Tape& tape, const ProCCModel& model, const Batch& batch, bool freeze_object_branch) {
  if (batch.state_labeled() == 0) throw std::invalid_argument("loss_state_con: batch has no state labels");
  const ForwardVars f = forward_graph(tape, model, batch.raw,
                                      ForwardOptions{model.config().use_cpc, freeze_object_branch});
  return tape.cross_entropy(f.state_probs, batch.states, present(batch.states));
}

Var loss_vp_con(Tape& tape, const ProCCModel& model, const Batch& batch) {
  if (batch.state_labeled() == 0 && batch.object_labeled() == 0) {
    throw std::invalid_argument("loss_vp_con: batch has no labels");
  }
  const ForwardVars f =
      forward_graph(tape, model, batch.raw, ForwardOptions{model.config().use_cpc, false});
  Var state_term = tape.cross_entropy(f.state_probs, batch.states, present(batch.states));
  Var object_term = tape.cross_entropy(f.object_probs, batch.objects, present(batch.objects));
  return tape.add(state_term, object_term);
}

double loss_obj_value(const ProCCModel& model, const Batch& batch) {
  Tape tape(model.params());
  return tape.scalar(loss_obj(tape, model, batch));
}

double loss_state_con_value(const ProCCModel& model, const Batch& batch) {
  Tape tape(model.params());
  return tape.scalar(loss_state_con(tape, model, batch));
}

double loss_vp_con_value(const ProCCModel& model, const Batch& batch) {
  Tape tape(model.params());
  return tape.scalar(loss_vp_con(tape, model, batch));
}

}  // namespace procc
