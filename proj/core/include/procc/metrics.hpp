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

#ifndef PROCC_METRICS_HPP_
#define PROCC_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "procc/dataset.hpp"
#include "procc/model.hpp"

namespace procc {

inline constexpr std::size_t kDefaultBiasCount = 101;

/// Unmasked composition scores for every fully labeled record of a split.
struct ScoreTable {
  std::size_t n_states = 0;
  std::size_t n_objects = 0;
  std::vector<double> scores;  // record-major, each record an |S|×|O| row-major block
  std::vector<Pair> truth;

  std::size_t n_records() const { return truth.size(); }
  std::size_t n_pairs() const { return n_states * n_objects; }
  const double* record(std::size_t i) const { return scores.data() + i * n_pairs(); }
};

ScoreTable score_split(const ProCCModel& model, const Dataset& dataset, Split split, bool use_cpc);

struct CohortAccuracy {
  std::optional<double> seen;
  std::optional<double> unseen;
};

/// Exact-pair top-1 accuracy per cohort with `bias` added to pairs outside `seen`.
CohortAccuracy accuracy_at_bias(const ScoreTable& table, const PairMask& space_mask,
                                const PairMask& seen, double bias);

CohortAccuracy evaluate_at_bias(const ProCCModel& model, const Dataset& dataset, Split split,
                                const PairMask& space_mask, const PairMask& seen, double bias);

double harmonic_mean(double seen, double unseen);

struct SweepPoint {
  double bias = 0.0;
  double seen = 0.0;
  double unseen = 0.0;
  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

/// Points in strictly increasing bias order. An empty cohort contributes 0.
struct BiasSweepResult {
  std::vector<SweepPoint> points;
  friend bool operator==(const BiasSweepResult&, const BiasSweepResult&) = default;
};

/// Symmetric grid over [-delta, +delta] with `n_biases` points plus exact 0,
/// where delta is the largest max-minus-min score spread of any record.
std::vector<double> bias_grid(const ScoreTable& table, std::size_t n_biases);

BiasSweepResult sweep_biases(const ScoreTable& table, const PairMask& space_mask,
                             const PairMask& seen, const std::vector<double>& biases);

/// Trapezoidal area under the (unseen, seen) curve; points sorted by unseen
/// accuracy with duplicate unseen values averaged.
double sweep_auc(const BiasSweepResult& sweep);

struct MetricsSummary {
  double best_seen = 0.0;
  double best_unseen = 0.0;
  double best_hm = 0.0;
  double auc = 0.0;
  double state_acc = 0.0;
  double object_acc = 0.0;
  std::size_t seen_records = 0;
  std::size_t unseen_records = 0;
  BiasSweepResult sweep;
};

/// Best S, U and HM (each maximized independently) plus AUC over the sweep.
MetricsSummary summarize_sweep(const BiasSweepResult& sweep);

MetricsSummary sweep_metrics(const ScoreTable& table, const PairMask& space_mask,
                             const PairMask& seen, std::size_t n_biases = kDefaultBiasCount);

/// Full evaluation of a split: sweep plus conditioned primitive accuracies.
MetricsSummary sweep_metrics(const ProCCModel& model, const Dataset& dataset, Split split,
                             const PairMask& space_mask, const PairMask& seen,
                             std::size_t n_biases = kDefaultBiasCount);

struct PrimitiveAccuracy {
  double state_acc = 0.0;   // conditioned (CPC on)
  double object_acc = 0.0;
  double state_acc_base = 0.0;  // bare heads
  double object_acc_base = 0.0;
};

PrimitiveAccuracy primitive_accuracy(const ProCCModel& model, const Dataset& dataset, Split split);

enum class EvalSetting { kClosed, kOpen };

/// Closed: the split's seen plus unseen pairs. Open: the whole grid.
PairMask space_mask_for(const SplitManifest& manifest, Split split, EvalSetting setting);

}  // namespace procc

#endif  // PROCC_METRICS_HPP_
