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

#include "procc/trainer.hpp"

#include <chrono>
#include <map>
#include <optional>
#include <string>

#include "procc/losses.hpp"
#include "procc/metrics.hpp"

namespace procc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::optional<double> validation_metric(const ProCCModel& model, const TrainContext& ctx, int stage) {
  const Dataset& ds = *ctx.dataset;
  if (ds.count(Split::kVal) == 0) return std::nullopt;
  if (stage == 1) return primitive_accuracy(model, ds, Split::kVal).object_acc_base;
  if (stage == 2) return primitive_accuracy(model, ds, Split::kVal).state_acc;
  const SplitManifest& m = *ctx.manifest;
  const ScoreTable table = score_split(model, ds, Split::kVal, model.config().use_cpc);
  const PairMask space = space_mask_for(m, Split::kVal, EvalSetting::kClosed);
  const PairMask seen = PairMask::from_pairs(m.n_states(), m.n_objects(), m.seen_pairs);
  return sweep_metrics(table, space, seen).best_hm;
}

// nullopt when the batch carries no label the stage's loss can use.
std::optional<Var> stage_loss(Tape& tape, const ProCCModel& model, const Batch& batch, int stage) {
  if (stage == 1) {
    if (batch.object_labeled() == 0) return std::nullopt;
    return loss_obj(tape, model, batch);
  }
  if (stage == 2) {
    if (batch.state_labeled() == 0) return std::nullopt;
    return loss_state_con(tape, model, batch, true);
  }
  if (batch.state_labeled() == 0 && batch.object_labeled() == 0) return std::nullopt;
  return loss_vp_con(tape, model, batch);
}

std::map<std::string, Tensor2> snapshot(const ProCCModel& model, const ParamScope& scope) {
  std::map<std::string, Tensor2> out;
  for (const auto& [name, entry] : model.params())
    if (scope.contains(name)) out.emplace(name, entry.value);
  return out;
}

TrainReport train_loop(ProCCModel& model, const TrainContext& ctx, const StageConfig& config) {
  const auto start = Clock::now();
  const Dataset& ds = *ctx.dataset;
  const ModelConfig& mc = model.config();
  if (ctx.manifest->n_states() != mc.n_states || ctx.manifest->n_objects() != mc.n_objects) {
    throw TrainError("model has " + std::to_string(mc.n_states) + " states and " +
                     std::to_string(mc.n_objects) + " objects, dataset has " +
                     std::to_string(ctx.manifest->n_states()) + " and " +
                     std::to_string(ctx.manifest->n_objects()));
  }
  if (ds.feature_dim != mc.raw_dim) {
    throw TrainError("model expects " + std::to_string(mc.raw_dim) + " input features, dataset has " +
                     std::to_string(ds.feature_dim));
  }
  TrainReport report;
  report.stage = config.stage;
  if (config.max_epochs == 0) return report;
  if (ds.count(Split::kTrain) == 0) throw TrainError("train split is empty");

  const ParamScope scope = stage_scope(config.stage, model);
  OptimState optim(config.optimizer);
  std::map<std::string, Tensor2> best;
  std::size_t since_best = 0;
  const std::uint64_t seed = ctx.shuffle_seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(config.stage));
  report.stop = StopReason::kMaxEpochs;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    double loss_sum = 0.0;
    std::size_t used = 0;
    for (const auto& idx : batch_iterator(ds, Split::kTrain, config.batch_size, seed, epoch)) {
      const Batch batch = make_batch(ds, idx);
      Tape tape(model.params());
      const std::optional<Var> loss = stage_loss(tape, model, batch, config.stage);
      if (!loss) continue;
      loss_sum += tape.scalar(*loss);
      tape.backward(*loss);
      optimizer_step(model.params(), optim, scope);
      ++used;
    }
    if (used == 0) {
      throw TrainError("stage " + std::to_string(config.stage) +
                       ": no training batch carries the labels this stage needs");
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(used);
    rec.val_metric = validation_metric(model, ctx, config.stage).value_or(-rec.train_loss);
    rec.seconds = ctx.measure_time ? seconds_since(epoch_start) : 0.0;
    report.epochs.push_back(rec);

    if (report.best_epoch == 0 || rec.val_metric > report.best_val_metric) {
      report.best_epoch = epoch;
      report.best_val_metric = rec.val_metric;
      best = snapshot(model, scope);
      since_best = 0;
    } else if (++since_best >= config.patience) {
      report.stop = StopReason::kPatience;
      break;
    }
  }
  for (auto& [name, value] : best) model.params().value(name) = value;
  report.wall_seconds = ctx.measure_time ? seconds_since(start) : 0.0;
  return report;
}

void check_context(const TrainContext& ctx) {
  if (ctx.dataset == nullptr || ctx.manifest == nullptr) {
    throw std::invalid_argument("training context needs a dataset and a manifest");
  }
}

}  // namespace

void StageConfig::validate() const {
  if (stage < 1 || stage > 3) throw std::invalid_argument("stage must be 1, 2 or 3");
  if (!(optimizer.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be at least 1");
  if (patience == 0) throw std::invalid_argument("patience must be at least 1");
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kNoEpochs: return "no_epochs";
    case StopReason::kMaxEpochs: return "max_epochs";
    case StopReason::kPatience: return "patience";
  }
  return "unknown";
}

ParamScope stage_scope(int stage, const ProCCModel& model) {
  switch (stage) {
    case 1: return ParamScope{{std::string(kGroupObjectHead)}};
    case 2: return ParamScope{{std::string(kGroupStateHead), std::string(kGroupObjectToState)}};
    case 3: {
      ParamScope scope{{std::string(kGroupObjectHead), std::string(kGroupStateHead),
                        std::string(kGroupObjectToState), std::string(kGroupStateToObject)}};
      if (model.config().backbone_trainable) scope.prefixes.emplace_back(kGroupBackbone);
      return scope;
    }
    default: throw std::invalid_argument("stage must be 1, 2 or 3, got " + std::to_string(stage));
  }
}

TrainReport run_stage(ProCCModel& model, const TrainContext& context, const StageConfig& config) {
  check_context(context);
  config.validate();
  if (model.stages_completed() != config.stage - 1) {
    throw TrainError("stage " + std::to_string(config.stage) + " requested but the model has completed " +
                     std::to_string(model.stages_completed()) + " stage(s)");
  }
  TrainReport report = train_loop(model, context, config);
  model.set_stages_completed(config.stage);
  return report;
}

std::array<TrainReport, 3> run_progressive(ProCCModel& model, const TrainContext& context,
                                           const std::array<StageConfig, 3>& configs) {
  std::array<TrainReport, 3> reports;
  for (int k = 0; k < 3; ++k) {
    if (configs[k].stage != k + 1) {
      throw std::invalid_argument("progressive config " + std::to_string(k + 1) + " is tagged stage " +
                                  std::to_string(configs[k].stage));
    }
    reports[k] = run_stage(model, context, configs[k]);
  }
  return reports;
}

TrainReport run_joint(ProCCModel& model, const TrainContext& context, StageConfig config) {
  check_context(context);
  config.stage = 3;
  config.validate();
  TrainReport report = train_loop(model, context, config);
  model.set_stages_completed(3);
  return report;
}

}  // namespace procc
