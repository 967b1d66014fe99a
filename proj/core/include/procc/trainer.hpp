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

#ifndef PROCC_TRAINER_HPP_
#define PROCC_TRAINER_HPP_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "procc/dataset.hpp"
#include "procc/model.hpp"
#include "procc/optimizer.hpp"

namespace procc {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StageConfig {
  int stage = 1;  // 1, 2 or 3; the joint variant uses 3
  OptimizerConfig optimizer;  // optimizer.learning_rate is the stage's lambda
  std::size_t max_epochs = 200;
  std::size_t batch_size = 128;
  std::size_t patience = 10;

  void validate() const;
};

enum class StopReason { kNoEpochs, kMaxEpochs, kPatience };

std::string_view to_string(StopReason reason);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_metric = 0.0;
  double seconds = 0.0;
};

/// Validation metric per stage: stage 1 bare object accuracy, stage 2
/// conditioned state accuracy, stage 3 closed-world validation best-HM. With
/// no validation records the negated train loss stands in.
struct TrainReport {
  int stage = 0;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  double best_val_metric = 0.0;
  double wall_seconds = 0.0;
  StopReason stop = StopReason::kNoEpochs;
};

struct TrainContext {
  const Dataset* dataset = nullptr;
  const SplitManifest* manifest = nullptr;
  std::uint64_t shuffle_seed = 0;
  // When false every recorded duration is 0 so reports are reproducible byte for byte.
  bool measure_time = true;
};

/// Parameter prefixes a stage updates. Stage 3 includes the backbone when it is trainable.
ParamScope stage_scope(int stage, const ProCCModel& model);

/// One stage of progressive training. Parameters outside the stage scope are
/// left bit-identical; the best-validation snapshot is restored at the end.
TrainReport run_stage(ProCCModel& model, const TrainContext& context, const StageConfig& config);

std::array<TrainReport, 3> run_progressive(ProCCModel& model, const TrainContext& context,
                                           const std::array<StageConfig, 3>& configs);

/// Single optimization over every group with the conditioned loss.
TrainReport run_joint(ProCCModel& model, const TrainContext& context, StageConfig config);

}  // namespace procc

#endif  // PROCC_TRAINER_HPP_
