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

#include "procc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "procc/losses.hpp"

namespace procc {

namespace {

constexpr std::size_t kEvalChunk = 256;

void check_mask(const PairMask& mask, std::size_t n_states, std::size_t n_objects, const char* what) {
  if (mask.n_states() != n_states || mask.n_objects() != n_objects) {
    throw ShapeError(std::string(what) + ": mask is " + std::to_string(mask.n_states()) + "x" +
                     std::to_string(mask.n_objects()) + ", expected " + std::to_string(n_states) +
                     "x" + std::to_string(n_objects));
  }
}

std::size_t argmax_row(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i)
    if (row[i] > row[best]) best = i;
  return best;
}

// Flat cell indices inside the space mask, partitioned by the seen mask.
struct CellSplit {
  std::vector<std::size_t> seen;
  std::vector<std::size_t> unseen;
};

CellSplit split_cells(std::size_t n_states, std::size_t n_objects, const PairMask& space_mask,
                      const PairMask& seen) {
  CellSplit out;
  for (std::size_t s = 0; s < n_states; ++s)
    for (std::size_t o = 0; o < n_objects; ++o)
      if (space_mask(s, o)) (seen(s, o) ? out.seen : out.unseen).push_back(s * n_objects + o);
  if (out.seen.empty() && out.unseen.empty()) throw DataError("evaluation: space mask selects no pair");
  return out;
}

// Top-1 cell at this bias with the same ordering as rank_pairs.
std::size_t predict_at(const double* scores, const CellSplit& cells, double bias) {
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  bool found = false;
  auto visit = [&](std::size_t cell, double v) {
    if (!found || v > best_value || (v == best_value && cell < best)) {
      best = cell;
      best_value = v;
      found = true;
    }
  };
  for (std::size_t cell : cells.seen) visit(cell, scores[cell]);
  for (std::size_t cell : cells.unseen) visit(cell, scores[cell] + bias);
  return best;
}

CohortAccuracy cohort_accuracy(const ScoreTable& table, const CellSplit& cells, const PairMask& seen,
                               double bias) {
  std::size_t seen_total = 0, seen_hit = 0, unseen_total = 0, unseen_hit = 0;
  for (std::size_t r = 0; r < table.n_records(); ++r) {
    const Pair& t = table.truth[r];
    const std::size_t truth =
        static_cast<std::size_t>(t.state) * table.n_objects + static_cast<std::size_t>(t.object);
    const bool hit = predict_at(table.record(r), cells, bias) == truth;
    if (seen.contains(t)) {
      ++seen_total;
      seen_hit += hit ? 1 : 0;
    } else {
      ++unseen_total;
      unseen_hit += hit ? 1 : 0;
    }
  }
  CohortAccuracy acc;
  if (seen_total > 0) acc.seen = static_cast<double>(seen_hit) / static_cast<double>(seen_total);
  if (unseen_total > 0) acc.unseen = static_cast<double>(unseen_hit) / static_cast<double>(unseen_total);
  return acc;
}

}  // namespace

ScoreTable score_split(const ProCCModel& model, const Dataset& dataset, Split split, bool use_cpc) {
  const ModelConfig& cfg = model.config();
  ScoreTable table;
  table.n_states = cfg.n_states;
  table.n_objects = cfg.n_objects;
  const std::vector<std::size_t> idx = dataset.indices(split);
  for (std::size_t i : idx) {
    const FeatureRecord& rec = dataset.records[i];
    if (!rec.label.complete()) {
      throw DataError("evaluation: record '" + rec.id + "' in split " +
                      std::string(to_string(split)) + " is not fully labeled");
    }
    table.truth.push_back(Pair{*rec.label.state, *rec.label.object});
  }
  table.scores.resize(idx.size() * table.n_pairs());
  for (std::size_t start = 0; start < idx.size(); start += kEvalChunk) {
    const std::size_t stop = std::min(idx.size(), start + kEvalChunk);
    const Batch batch = make_batch(dataset, std::span(idx).subspan(start, stop - start));
    const BatchProbs probs = predict_batch(model, batch.raw, use_cpc);
    for (std::size_t r = 0; r < stop - start; ++r) {
      double* out = table.scores.data() + (start + r) * table.n_pairs();
      for (std::size_t s = 0; s < table.n_states; ++s)
        for (std::size_t o = 0; o < table.n_objects; ++o)
          out[s * table.n_objects + o] = probs.p_state(r, s) * probs.p_object(r, o);
    }
  }
  return table;
}

CohortAccuracy accuracy_at_bias(const ScoreTable& table, const PairMask& space_mask,
                                const PairMask& seen, double bias) {
  check_mask(space_mask, table.n_states, table.n_objects, "accuracy_at_bias");
  check_mask(seen, table.n_states, table.n_objects, "accuracy_at_bias");
  const CohortAccuracy acc =
      cohort_accuracy(table, split_cells(table.n_states, table.n_objects, space_mask, seen), seen, bias);
  if (!acc.seen && !acc.unseen) throw DataError("accuracy_at_bias: no records to evaluate");
  return acc;
}

CohortAccuracy evaluate_at_bias(const ProCCModel& model, const Dataset& dataset, Split split,
                                const PairMask& space_mask, const PairMask& seen, double bias) {
  return accuracy_at_bias(score_split(model, dataset, split, model.config().use_cpc), space_mask,
                          seen, bias);
}

double harmonic_mean(double seen, double unseen) {
  if (seen < 0.0 || unseen < 0.0) throw std::invalid_argument("harmonic_mean: negative input");
  const double total = seen + unseen;
  return total == 0.0 ? 0.0 : 2.0 * seen * unseen / total;
}

std::vector<double> bias_grid(const ScoreTable& table, std::size_t n_biases) {
  if (n_biases < 2) throw std::invalid_argument("bias_grid: need at least 2 biases");
  double delta = 0.0;
  for (std::size_t r = 0; r < table.n_records(); ++r) {
    const double* s = table.record(r);
    const auto [lo, hi] = std::minmax_element(s, s + table.n_pairs());
    delta = std::max(delta, *hi - *lo);
  }
  std::vector<double> grid;
  grid.reserve(n_biases + 1);
  const auto denom = static_cast<double>(n_biases - 1);
  for (std::size_t i = 0; i < n_biases; ++i) {
    // Symmetric form so the mirrored points are exact negatives.
    grid.push_back(delta * (2.0 * static_cast<double>(i) - denom) / denom);
  }
  grid.push_back(0.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

BiasSweepResult sweep_biases(const ScoreTable& table, const PairMask& space_mask,
                             const PairMask& seen, const std::vector<double>& biases) {
  check_mask(space_mask, table.n_states, table.n_objects, "sweep");
  check_mask(seen, table.n_states, table.n_objects, "sweep");
  if (table.n_records() == 0) throw DataError("sweep: no records to evaluate");
  const CellSplit cells = split_cells(table.n_states, table.n_objects, space_mask, seen);
  BiasSweepResult out;
  out.points.reserve(biases.size());
  for (double b : biases) {
    const CohortAccuracy acc = cohort_accuracy(table, cells, seen, b);
    out.points.push_back({b, acc.seen.value_or(0.0), acc.unseen.value_or(0.0)});
  }
  return out;
}

double sweep_auc(const BiasSweepResult& sweep) {
  std::map<double, std::pair<double, std::size_t>> by_unseen;
  for (const SweepPoint& p : sweep.points) {
    auto& [sum, n] = by_unseen[p.unseen];
    sum += p.seen;
    ++n;
  }
  double area = 0.0;
  bool first = true;
  double prev_u = 0.0, prev_s = 0.0;
  for (const auto& [u, acc] : by_unseen) {
    const double s = acc.first / static_cast<double>(acc.second);
    if (!first) area += 0.5 * (s + prev_s) * (u - prev_u);
    prev_u = u;
    prev_s = s;
    first = false;
  }
  return area;
}

MetricsSummary summarize_sweep(const BiasSweepResult& sweep) {
  if (sweep.points.empty()) throw std::invalid_argument("summarize_sweep: empty sweep");
  MetricsSummary m;
  for (const SweepPoint& p : sweep.points) {
    m.best_seen = std::max(m.best_seen, p.seen);
    m.best_unseen = std::max(m.best_unseen, p.unseen);
    m.best_hm = std::max(m.best_hm, harmonic_mean(p.seen, p.unseen));
  }
  m.auc = sweep_auc(sweep);
  m.sweep = sweep;
  return m;
}

MetricsSummary sweep_metrics(const ScoreTable& table, const PairMask& space_mask,
                             const PairMask& seen, std::size_t n_biases) {
  MetricsSummary m =
      summarize_sweep(sweep_biases(table, space_mask, seen, bias_grid(table, n_biases)));
  for (const Pair& t : table.truth) (seen.contains(t) ? m.seen_records : m.unseen_records)++;
  return m;
}

MetricsSummary sweep_metrics(const ProCCModel& model, const Dataset& dataset, Split split,
                             const PairMask& space_mask, const PairMask& seen, std::size_t n_biases) {
  const ScoreTable table = score_split(model, dataset, split, model.config().use_cpc);
  MetricsSummary m = sweep_metrics(table, space_mask, seen, n_biases);
  const PrimitiveAccuracy prim = primitive_accuracy(model, dataset, split);
  m.state_acc = prim.state_acc;
  m.object_acc = prim.object_acc;
  return m;
}

PrimitiveAccuracy primitive_accuracy(const ProCCModel& model, const Dataset& dataset, Split split) {
  const std::vector<std::size_t> idx = dataset.indices(split);
  if (idx.empty()) throw DataError("primitive_accuracy: split is empty");
  std::size_t n_state = 0, n_object = 0;
  std::size_t hit_state = 0, hit_object = 0, hit_state_base = 0, hit_object_base = 0;
  for (std::size_t start = 0; start < idx.size(); start += kEvalChunk) {
    const std::size_t stop = std::min(idx.size(), start + kEvalChunk);
    const Batch batch = make_batch(dataset, std::span(idx).subspan(start, stop - start));
    Tape tape(model.params());
    const ForwardVars f =
        forward_graph(tape, model, batch.raw, ForwardOptions{model.config().use_cpc, false});
    const Tensor2& ps = tape.value(f.state_probs);
    const Tensor2& po = tape.value(f.object_probs);
    const Tensor2& ps0 = tape.value(f.state_base_probs);
    const Tensor2& po0 = tape.value(f.object_base_probs);
    for (std::size_t r = 0; r < batch.size(); ++r) {
      if (batch.states[r] >= 0) {
        const auto want = static_cast<std::size_t>(batch.states[r]);
        ++n_state;
        hit_state += argmax_row(ps.row(r)) == want ? 1 : 0;
        hit_state_base += argmax_row(ps0.row(r)) == want ? 1 : 0;
      }
      if (batch.objects[r] >= 0) {
        const auto want = static_cast<std::size_t>(batch.objects[r]);
        ++n_object;
        hit_object += argmax_row(po.row(r)) == want ? 1 : 0;
        hit_object_base += argmax_row(po0.row(r)) == want ? 1 : 0;
      }
    }
  }
  auto ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  return {ratio(hit_state, n_state), ratio(hit_object, n_object), ratio(hit_state_base, n_state),
          ratio(hit_object_base, n_object)};
}

PairMask space_mask_for(const SplitManifest& manifest, Split split, EvalSetting setting) {
  if (setting == EvalSetting::kOpen) return PairMask(manifest.n_states(), manifest.n_objects(), true);
  return PairMask::from_pairs(manifest.n_states(), manifest.n_objects(), manifest.closed_pairs(split));
}

}  // namespace procc
