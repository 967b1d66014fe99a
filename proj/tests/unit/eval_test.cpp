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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "procc/diagnostics.hpp"
#include "procc/metrics.hpp"
#include "procc/report.hpp"
#include "procc/synthetic.hpp"
#include "procc/trainer.hpp"
#include "test_util.hpp"

namespace procc {
namespace {

using testing::model_for;
using testing::tiny_world;
using testing::zero_params;

ScoreTable table_from(std::size_t n_states, std::size_t n_objects, const std::vector<std::vector<double>>& rows,
                      const std::vector<Pair>& truth) {
  ScoreTable t;
  t.n_states = n_states;
  t.n_objects = n_objects;
  for (const auto& r : rows) t.scores.insert(t.scores.end(), r.begin(), r.end());
  t.truth = truth;
  return t;
}

ScoreTable random_table(std::mt19937_64& rng, std::size_t n_states, std::size_t n_objects, std::size_t n) {
  std::uniform_real_distribution<double> u(0, 1);
  ScoreTable t;
  t.n_states = n_states;
  t.n_objects = n_objects;
  t.scores.resize(n * n_states * n_objects);
  for (double& v : t.scores) v = u(rng) * u(rng);
  for (std::size_t i = 0; i < n; ++i)
    t.truth.push_back(Pair{static_cast<int>(rng() % n_states), static_cast<int>(rng() % n_objects)});
  return t;
}

PairMask random_mask(std::mt19937_64& rng, std::size_t n_states, std::size_t n_objects, int percent) {
  PairMask m(n_states, n_objects);
  for (std::size_t s = 0; s < n_states; ++s)
    for (std::size_t o = 0; o < n_objects; ++o) m.set(s, o, static_cast<int>(rng() % 100) < percent);
  return m;
}

// Independent oracle: top-1 through rank_pairs on a masked copy of each record.
SweepPoint oracle_point(const ScoreTable& t, const PairMask& space, const PairMask& seen, double bias) {
  std::size_t sn = 0, sh = 0, un = 0, uh = 0;
  for (std::size_t r = 0; r < t.n_records(); ++r) {
    Tensor2 grid(t.n_states, t.n_objects);
    for (std::size_t s = 0; s < t.n_states; ++s)
      for (std::size_t o = 0; o < t.n_objects; ++o)
        grid(s, o) = space(s, o) ? t.record(r)[s * t.n_objects + o] : kMaskedScore;
    const bool hit = rank_pairs(grid, seen, bias, 1)[0].pair == t.truth[r];
    if (seen.contains(t.truth[r])) {
      ++sn;
      sh += hit;
    } else {
      ++un;
      uh += hit;
    }
  }
  return SweepPoint{bias, sn ? double(sh) / double(sn) : 0.0, un ? double(uh) / double(un) : 0.0};
}

TEST(HarmonicMean, Examples) {
  EXPECT_DOUBLE_EQ(harmonic_mean(0.37, 0.37), 0.37);
  EXPECT_EQ(harmonic_mean(0.0, 0.8), 0.0);
  EXPECT_EQ(harmonic_mean(0.0, 0.0), 0.0);
  EXPECT_NEAR(harmonic_mean(0.30, 0.10), 0.15, 1e-15);
  EXPECT_THROW(harmonic_mean(-0.1, 0.5), std::invalid_argument);
}

TEST(AccuracyAtBias, VeryNegativeBiasNeverPredictsUnseen) {
  std::mt19937_64 rng(1);
  const ScoreTable t = random_table(rng, 4, 3, 40);
  const PairMask all(4, 3, true);
  const PairMask seen = random_mask(rng, 4, 3, 50);
  const CohortAccuracy acc = accuracy_at_bias(t, all, seen, -1e9);
  ASSERT_TRUE(acc.unseen.has_value());
  EXPECT_EQ(*acc.unseen, 0.0);
}

TEST(AccuracyAtBias, SingleSeenRecordHasAbsentUnseenCohort) {
  const ScoreTable t = table_from(2, 2, {{0.9, 0.05, 0.03, 0.02}}, {Pair{0, 0}});
  PairMask seen(2, 2);
  seen.set(0, 0, true);
  const CohortAccuracy acc = accuracy_at_bias(t, PairMask(2, 2, true), seen, 0.0);
  EXPECT_EQ(acc.seen, 1.0);
  EXPECT_FALSE(acc.unseen.has_value());
}

TEST(AccuracyAtBias, TwoRecordsStraddleTheBias) {
  // Seen pair (0,0), unseen pair (1,1); both records score the seen pair higher by 0.3.
  const ScoreTable t = table_from(2, 2, {{0.5, 0.0, 0.0, 0.2}, {0.5, 0.0, 0.0, 0.2}}, {Pair{0, 0}, Pair{1, 1}});
  PairMask seen(2, 2);
  seen.set(0, 0, true);
  const PairMask all(2, 2, true);
  const CohortAccuracy at0 = accuracy_at_bias(t, all, seen, 0.0);
  EXPECT_EQ(at0.seen, 1.0);
  EXPECT_EQ(at0.unseen, 0.0);
  const CohortAccuracy large = accuracy_at_bias(t, all, seen, 1.0);
  EXPECT_EQ(large.seen, 0.0);
  EXPECT_EQ(large.unseen, 1.0);
}

TEST(AccuracyAtBias, Errors) {
  ScoreTable empty;
  empty.n_states = 2;
  empty.n_objects = 2;
  EXPECT_THROW(accuracy_at_bias(empty, PairMask(2, 2, true), PairMask(2, 2), 0.0), DataError);
  const ScoreTable t = table_from(2, 2, {{1, 0, 0, 0}}, {Pair{0, 0}});
  EXPECT_THROW(accuracy_at_bias(t, PairMask(2, 2), PairMask(2, 2), 0.0), DataError);
  EXPECT_THROW(accuracy_at_bias(t, PairMask(3, 2, true), PairMask(2, 2), 0.0), ShapeError);
}

TEST(Sweep, RectangleAuc) {
  const BiasSweepResult sweep{{{-1, 0.6, 0.0}, {0, 0.6, 0.2}, {1, 0.6, 0.5}}};
  EXPECT_NEAR(sweep_auc(sweep), 0.6 * 0.5, 1e-15);
}

TEST(Sweep, BestHmNeedNotSitAtBestSeenOrUnseen) {
  const BiasSweepResult sweep{{{-1, 0.9, 0.1}, {0, 0.6, 0.5}, {1, 0.2, 0.7}}};
  EXPECT_NEAR(harmonic_mean(0.9, 0.1), 0.18, 1e-12);
  EXPECT_NEAR(harmonic_mean(0.2, 0.7), 0.311, 1e-3);
  const MetricsSummary m = summarize_sweep(sweep);
  EXPECT_NEAR(m.best_hm, 0.545, 1e-3);
  EXPECT_EQ(m.best_hm, harmonic_mean(0.6, 0.5));
  EXPECT_EQ(m.best_seen, 0.9);
  EXPECT_EQ(m.best_unseen, 0.7);
}

TEST(Sweep, SingleAlwaysCorrectRecord) {
  const ScoreTable t = table_from(2, 2, {{0.9, 0.05, 0.03, 0.02}}, {Pair{0, 0}});
  PairMask seen(2, 2);
  seen.set(0, 0, true);
  const MetricsSummary m = sweep_metrics(t, PairMask(2, 2, true), seen);
  EXPECT_EQ(m.best_seen, 1.0);
  EXPECT_EQ(m.best_unseen, 0.0);
  EXPECT_EQ(m.auc, 0.0);
}

TEST(Sweep, GridIsSymmetricIncreasingAndHoldsZero) {
  std::mt19937_64 rng(2);
  const ScoreTable t = random_table(rng, 3, 3, 10);
  double delta = 0;
  for (std::size_t r = 0; r < t.n_records(); ++r) {
    const auto [lo, hi] = std::minmax_element(t.record(r), t.record(r) + t.n_pairs());
    delta = std::max(delta, *hi - *lo);
  }
  for (std::size_t n : {2u, 4u, 101u}) {
    const std::vector<double> g = bias_grid(t, n);
    EXPECT_EQ(g.front(), -delta);
    EXPECT_EQ(g.back(), delta);
    EXPECT_EQ(std::count(g.begin(), g.end(), 0.0), 1);
    EXPECT_TRUE(std::is_sorted(g.begin(), g.end(), std::less_equal<>()) && std::adjacent_find(g.begin(), g.end()) == g.end());
    EXPECT_GE(g.size(), n);
    EXPECT_LE(g.size(), n + 1);
  }
  EXPECT_THROW(bias_grid(t, 1), std::invalid_argument);
}

TEST(SweepProperty, MatchesBruteForceOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const ScoreTable t = random_table(rng, 4, 5, 30);
    const PairMask space = random_mask(rng, 4, 5, trial % 2 ? 100 : 70);
    const PairMask seen = random_mask(rng, 4, 5, 50);
    if (space.count() == 0) continue;
    const MetricsSummary m = sweep_metrics(t, space, seen, 21);
    const std::vector<double> grid = bias_grid(t, 21);
    ASSERT_EQ(m.sweep.points.size(), grid.size());
    double best_hm = 0, best_s = 0, best_u = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const SweepPoint want = oracle_point(t, space, seen, grid[i]);
      ASSERT_EQ(m.sweep.points[i], want) << "trial " << trial << " bias " << grid[i];
      best_hm = std::max(best_hm, harmonic_mean(want.seen, want.unseen));
      best_s = std::max(best_s, want.seen);
      best_u = std::max(best_u, want.unseen);
    }
    EXPECT_EQ(m.best_hm, best_hm);
    EXPECT_EQ(m.best_seen, best_s);
    EXPECT_EQ(m.best_unseen, best_u);
  }
}

TEST(SweepProperty, SeenFallsAndUnseenRisesWithBias) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const ScoreTable t = random_table(rng, 4, 4, 25);
    const PairMask seen = random_mask(rng, 4, 4, 50);
    const BiasSweepResult s = sweep_biases(t, PairMask(4, 4, true), seen, bias_grid(t, 31));
    for (std::size_t i = 1; i < s.points.size(); ++i) {
      ASSERT_LT(s.points[i - 1].bias, s.points[i].bias);
      ASSERT_LE(s.points[i].seen, s.points[i - 1].seen);
      ASSERT_GE(s.points[i].unseen, s.points[i - 1].unseen);
    }
  }
}

TEST(SweepProperty, AucIgnoresOrderAndIsMonotone) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    BiasSweepResult a;
    for (int i = 0; i < 8; ++i) a.points.push_back({double(i), u(rng), std::round(u(rng) * 4) / 4});
    BiasSweepResult reversed = a;
    std::reverse(reversed.points.begin(), reversed.points.end());
    ASSERT_NEAR(sweep_auc(a), sweep_auc(reversed), 1e-12);
    BiasSweepResult higher = a;
    for (SweepPoint& p : higher.points) p.seen = std::min(1.0, p.seen + u(rng) * 0.2);
    ASSERT_GE(sweep_auc(higher), sweep_auc(a) - 1e-12);
    ASSERT_GE(sweep_auc(a), 0.0);
    ASSERT_LE(sweep_auc(a), 1.0);
  }
  EXPECT_EQ(sweep_auc(BiasSweepResult{}), 0.0);
}

class TrainedWorld : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    world_ = new SyntheticWorld(generate_synthetic_world(tiny_world(11)));
    model_ = new ProCCModel(model_for(*world_), 2);
    StageConfig c;
    c.max_epochs = 15;
    c.batch_size = 16;
    c.optimizer.learning_rate = 0.01;
    std::array<StageConfig, 3> cs{c, c, c};
    for (int k = 0; k < 3; ++k) cs[static_cast<std::size_t>(k)].stage = k + 1;
    run_progressive(*model_, TrainContext{&world_->dataset, &world_->manifest, 3, false}, cs);
  }
  static void TearDownTestSuite() {
    delete model_;
    delete world_;
  }
  static SyntheticWorld* world_;
  static ProCCModel* model_;
};
SyntheticWorld* TrainedWorld::world_ = nullptr;
ProCCModel* TrainedWorld::model_ = nullptr;

TEST_F(TrainedWorld, EvaluateAtBiasMatchesPredictTopk) {
  const SplitManifest& man = world_->manifest;
  const PairMask seen = PairMask::from_pairs(man.n_states(), man.n_objects(), man.seen_pairs);
  const PairMask space = space_mask_for(man, Split::kTest, EvalSetting::kClosed);
  for (double bias : {-0.05, 0.0, 0.02, 0.1}) {
    std::size_t sn = 0, sh = 0, un = 0, uh = 0;
    for (std::size_t i : world_->dataset.indices(Split::kTest)) {
      const FeatureRecord& r = world_->dataset.records[i];
      const Pair truth{*r.label.state, *r.label.object};
      const bool hit = predict_topk(*model_, backbone_embed(*model_, r.feature), space, seen, bias, 1)[0].pair == truth;
      (seen.contains(truth) ? sn : un) += 1;
      (seen.contains(truth) ? sh : uh) += hit;
    }
    const CohortAccuracy acc = evaluate_at_bias(*model_, world_->dataset, Split::kTest, space, seen, bias);
    EXPECT_EQ(acc.seen, double(sh) / double(sn)) << bias;
    EXPECT_EQ(acc.unseen, double(uh) / double(un)) << bias;
  }
}

TEST_F(TrainedWorld, OpenNeverBeatsClosed) {
  const SplitManifest& man = world_->manifest;
  const PairMask seen = PairMask::from_pairs(man.n_states(), man.n_objects(), man.seen_pairs);
  for (Split split : {Split::kVal, Split::kTest}) {
    const MetricsSummary closed =
        sweep_metrics(*model_, world_->dataset, split, space_mask_for(man, split, EvalSetting::kClosed), seen);
    const MetricsSummary open =
        sweep_metrics(*model_, world_->dataset, split, space_mask_for(man, split, EvalSetting::kOpen), seen);
    EXPECT_LE(open.best_hm, closed.best_hm);
    EXPECT_GT(closed.best_hm, 0.0);
    EXPECT_EQ(open.state_acc, closed.state_acc);
    for (double v : {closed.best_seen, closed.best_unseen, closed.best_hm, closed.auc, closed.state_acc, closed.object_acc}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST_F(TrainedWorld, SpaceMasks) {
  const SplitManifest& man = world_->manifest;
  EXPECT_EQ(space_mask_for(man, Split::kTest, EvalSetting::kOpen).count(), man.full_space());
  EXPECT_EQ(space_mask_for(man, Split::kTest, EvalSetting::kClosed).count(), man.closed_pairs(Split::kTest).size());
}

TEST_F(TrainedWorld, ConfusionRowsAreDistributions) {
  for (CpmDirection dir : {CpmDirection::kObjectToState, CpmDirection::kStateToObject})
    for (bool cpc : {false, true}) {
      const ConditionalConfusion c = conditional_confusion(*model_, world_->dataset, Split::kTest, dir, cpc);
      const std::size_t rows = dir == CpmDirection::kObjectToState ? 4 : 5;
      ASSERT_EQ(c.matrix.rows(), rows);
      ASSERT_EQ(c.matrix.cols(), 9 - rows);
      for (std::size_t r = 0; r < rows; ++r) {
        double s = 0;
        for (double v : c.matrix.row(r)) s += v;
        EXPECT_NEAR(s, 1.0, 1e-6);
      }
    }
}

TEST_F(TrainedWorld, PrimitiveAccuracyReportsBothVariants) {
  const PrimitiveAccuracy acc = primitive_accuracy(*model_, world_->dataset, Split::kTest);
  for (double v : {acc.state_acc, acc.object_acc, acc.state_acc_base, acc.object_acc_base}) {
    EXPECT_GT(v, 0.5);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Confusion, ZeroModelIsUniformAndFlagsEmptyRows) {
  const SyntheticWorld w = generate_synthetic_world(tiny_world(4));
  ProCCModel m(model_for(w), 0);
  zero_params(m);
  Dataset d = w.dataset;
  std::erase_if(d.records, [](const FeatureRecord& r) { return r.split == Split::kTest && r.label.object == 0; });
  const ConditionalConfusion c = conditional_confusion(m, d, Split::kTest, CpmDirection::kObjectToState, true);
  EXPECT_TRUE(c.empty_rows[0]);
  for (double v : c.matrix.data()) EXPECT_NEAR(v, 0.2, 1e-15);
  Dataset none = d;
  std::erase_if(none.records, [](const FeatureRecord& r) { return r.split == Split::kTest; });
  EXPECT_THROW(conditional_confusion(m, none, Split::kTest, CpmDirection::kObjectToState, true), DataError);
  EXPECT_THROW(primitive_accuracy(m, none, Split::kTest), DataError);
}

TEST(Confusion, FeasibleMassOfUniformRowsIsFeasibleFraction) {
  ConditionalConfusion c;
  c.direction = CpmDirection::kObjectToState;
  c.matrix = Tensor2(2, 4, 0.25);
  c.empty_rows = {false, false};
  PairMask feas(4, 2);  // states x objects
  feas.set(0, 0, true);
  feas.set(1, 1, true);
  feas.set(2, 1, true);
  EXPECT_NEAR(feasible_mass(c, feas), (0.25 + 0.5) / 2, 1e-15);
}

TEST(PrimitiveAccuracy, MemorizedTinyWorldIsPerfect) {
  SyntheticWorldConfig cfg = tiny_world(8);
  cfg.noise_sigma = 0.01;
  const SyntheticWorld w = generate_synthetic_world(cfg);
  ProCCModel m(model_for(w), 1);
  StageConfig c;
  c.stage = 3;
  c.max_epochs = 100;
  c.batch_size = 8;
  c.optimizer.learning_rate = 0.01;
  run_joint(m, TrainContext{&w.dataset, &w.manifest, 1, false}, c);
  const PrimitiveAccuracy acc = primitive_accuracy(m, w.dataset, Split::kTrain);
  EXPECT_EQ(acc.state_acc, 1.0);
  EXPECT_EQ(acc.object_acc, 1.0);
}

TEST(Report, SweepCsvRoundTripsExactly) {
  std::mt19937_64 rng(6);
  const ScoreTable t = random_table(rng, 3, 4, 17);
  const BiasSweepResult s = sweep_biases(t, PairMask(3, 4, true), random_mask(rng, 3, 4, 50), bias_grid(t, 101));
  std::stringstream buf;
  write_sweep_csv(buf, s);
  EXPECT_EQ(parse_sweep_csv(buf), s);
}

TEST(Report, ExportWritesAllFiles) {
  const auto dir = testing::scratch_dir("report");
  MetricsSummary m = summarize_sweep(BiasSweepResult{{{-1, 0.9, 0.1}, {0, 0.6, 0.5}, {1, 0.2, 0.7}}});
  ConditionalConfusion c;
  c.direction = CpmDirection::kStateToObject;
  c.use_cpc = true;
  c.matrix = Tensor2(2, 2, 0.5);
  c.empty_rows = {false, true};
  TrainReport r;
  r.stage = 1;
  r.epochs = {{1, 0.5, 0.7, 0.0}};
  export_report(dir / "out", m, std::span(&c, 1), std::span(&r, 1));
  for (auto f : {"metrics.csv", "sweep.csv", "confusion_s2o_cpc.csv", "sweep.svg", "summary.md"})
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / f)) << f;
  std::ifstream metrics(dir / "out" / "metrics.csv");
  std::string line;
  std::getline(metrics, line);
  EXPECT_EQ(line, "metric,value");
  std::size_t rows = 0;
  while (std::getline(metrics, line)) rows += !line.empty();
  EXPECT_EQ(rows, 6u);
  std::ifstream sweep(dir / "out" / "sweep.csv");
  EXPECT_EQ(parse_sweep_csv(sweep), m.sweep);
}

TEST(Report, EmptySweepWritesNothing) {
  const auto dir = testing::scratch_dir("report_empty") / "out";
  EXPECT_THROW(export_report(dir, MetricsSummary{}, {}), ReportError);
  EXPECT_FALSE(std::filesystem::exists(dir / "metrics.csv"));
}

}  // namespace
}  // namespace procc
