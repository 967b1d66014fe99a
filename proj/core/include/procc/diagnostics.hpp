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

#ifndef PROCC_DIAGNOSTICS_HPP_
#define PROCC_DIAGNOSTICS_HPP_

#include <string_view>
#include <vector>

#include "procc/dataset.hpp"
#include "procc/model.hpp"

namespace procc {

/// Mean predicted distribution of the target primitive per conditioning class.
/// kObjectToState: rows are objects, columns states. kStateToObject: the reverse.
struct ConditionalConfusion {
  CpmDirection direction = CpmDirection::kObjectToState;
  bool use_cpc = false;
  Tensor2 matrix;
  std::vector<bool> empty_rows;  // rows with no records, filled uniform
};

std::string_view direction_tag(CpmDirection direction);  // "o2s" / "s2o"

ConditionalConfusion conditional_confusion(const ProCCModel& model, const Dataset& dataset, Split split,
                                           CpmDirection direction, bool use_cpc);

/// Mean over non-empty rows of the probability mass on feasible (conditioning, target) cells.
double feasible_mass(const ConditionalConfusion& confusion, const PairMask& feasibility);

}  // namespace procc

#endif  // PROCC_DIAGNOSTICS_HPP_
