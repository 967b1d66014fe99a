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

#include "procc/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>

#include "procc/losses.hpp"
#include "procc/model.hpp"

namespace procc {

double finite_diff_check(ParamStore& store, const std::string& name, const Tensor2& analytic,
                         const std::function<double()>& loss, const GradCheckOptions& options) {
  Tensor2& value = store.value(name);
  if (!analytic.same_shape(value)) {
    throw ShapeError("finite_diff_check: gradient " + analytic.shape_string() + " vs parameter " +
                     value.shape_string());
  }
  std::vector<std::size_t> coords(value.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (coords.size() > options.max_coords) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coords);
  }
  double worst = 0.0;
  for (std::size_t i : coords) {
    const double saved = value.data()[i];
    value.data()[i] = saved + options.epsilon;
    const double up = loss();
    value.data()[i] = saved - options.epsilon;
    const double down = loss();
    value.data()[i] = saved;
    const double fd = (up - down) / (2.0 * options.epsilon);
    const double a = analytic.data()[i];
    worst = std::max(worst, std::abs(a - fd) / std::max(std::abs(a) + std::abs(fd), options.abs_floor));
  }
  return worst;
}

double finite_diff_check(ParamStore& store, const std::string& name, const LossBuilder& build,
                         const GradCheckOptions& options) {
  Tensor2 analytic;
  {
    Tape tape(store);
    tape.backward(build(tape));
    analytic = store.grad(name);
  }
  auto loss = [&] {
    Tape tape(std::as_const(store));
    return tape.scalar(build(tape));
  };
  return finite_diff_check(store, name, analytic, loss, options);
}

namespace {

constexpr std::size_t kBatch = 4;

Tensor2 random_tensor(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double min_abs = 0.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor2 t(rows, cols);
  for (double& v : t.data()) {
    do {
      v = normal(rng);
    } while (std::abs(v) < min_abs);
  }
  return t;
}

std::vector<int> random_labels(std::mt19937_64& rng, std::size_t n, int classes) {
  std::uniform_int_distribution<int> pick(0, classes - 1);
  std::vector<int> out(n);
  for (int& v : out) v = pick(rng);
  return out;
}

class Suite {
 public:
  Suite(std::uint64_t seed, double tolerance) : rng_(seed), seed_(seed), tolerance_(tolerance) {}

  void check(ParamStore& store, const std::string& component, const std::vector<std::string>& names,
             const LossBuilder& build) {
    GradCheckEntry entry{component, names.size() == 1 ? names.front() : component, 0.0, false};
    for (const std::string& name : names) {
      GradCheckOptions opt;
      opt.seed = seed_ + results_.size();
      entry.max_rel_error = std::max(entry.max_rel_error, finite_diff_check(store, name, build, opt));
    }
    entry.passed = entry.max_rel_error < tolerance_;
    results_.push_back(std::move(entry));
  }

  void run_ops() {
    const std::vector<int> labels = random_labels(rng_, kBatch, 3);
    const std::vector<bool> all(kBatch, true);
    ParamStore store;
    store.add("a", random_tensor(rng_, kBatch, 5, 0.05));
    store.add("b", random_tensor(rng_, 5, 3));
    store.add("bias", random_tensor(rng_, 1, 3));
    store.add("x", random_tensor(rng_, kBatch, 7));
    store.add("kernel", random_tensor(rng_, 1, 3));
    store.add("w", random_tensor(rng_, 7, 3));

    auto affine = [&](Tape& t) {
      return t.add_row_bias(t.matmul(t.param("a"), t.param("b")), t.param("bias"));
    };
    check(store, "matmul", {"a", "b"}, [&](Tape& t) {
      return t.cross_entropy(t.softmax_rows(t.matmul(t.param("a"), t.param("b"))), labels, all);
    });
    check(store, "add_row_bias", {"bias"},
          [&](Tape& t) { return t.cross_entropy(t.softmax_rows(affine(t)), labels, all); });
    check(store, "relu", {"a"}, [&](Tape& t) {
      return t.cross_entropy(t.softmax_rows(t.matmul(t.relu(t.param("a")), t.param("b"))), labels, all);
    });
    check(store, "softmax", {"b"}, [&](Tape& t) {
      return t.cross_entropy(t.softmax_rows(t.scale(t.matmul(t.param("a"), t.param("b")), 0.5)),
                             labels, all);
    });
    auto conv_loss = [&](Tape& t) {
      Var h = t.conv1d_rows(t.param("x"), t.param("kernel"));
      return t.cross_entropy(t.softmax_rows(t.matmul(h, t.param("w"))), labels, all);
    };
    check(store, "conv1d.input", {"x"}, conv_loss);
    check(store, "conv1d.kernel", {"kernel"}, conv_loss);
    std::vector<bool> partial(kBatch, true);
    partial[1] = false;
    check(store, "cross_entropy.masked", {"a"},
          [&](Tape& t) { return t.cross_entropy(t.softmax_rows(affine(t)), labels, partial); });
  }

  void run_model() {
    ModelConfig cfg;
    cfg.n_states = 4;
    cfg.n_objects = 3;
    cfg.raw_dim = 6;
    cfg.embed_dim = 8;
    cfg.n_layers = 3;
    cfg.cpm_kernel = 3;
    cfg.alpha = 0.8;
    cfg.backbone_trainable = true;
    ProCCModel model(cfg, seed_ + 17);
    // Nonzero biases keep relu inputs off the kink even when a whole layer is inactive.
    for (auto& [name, entry] : model.params())
      if (name.ends_with(".bias")) entry.value = random_tensor(rng_, entry.value.rows(), entry.value.cols(), 0.05);

    Batch batch;
    batch.raw = random_tensor(rng_, kBatch, cfg.raw_dim);
    batch.states = random_labels(rng_, kBatch, static_cast<int>(cfg.n_states));
    batch.objects = random_labels(rng_, kBatch, static_cast<int>(cfg.n_objects));
    ParamStore& store = model.params();

    auto vp = [&](Tape& t) { return loss_vp_con(t, model, batch); };
    for (const MlpHead* head : {&model.object_head(), &model.state_head()}) {
      for (std::size_t l = 1; l <= head->n_layers(); ++l) {
        check(store, head->prefix + ".layer" + std::to_string(l), {head->weight_name(l), head->bias_name(l)},
              vp);
      }
    }
    for (const CpmUnit* unit : {&model.object_to_state(), &model.state_to_object()}) {
      check(store, unit->prefix + ".conv", {unit->kernel_name()}, vp);
      check(store, unit->prefix + ".projection", {unit->projection_name()}, vp);
    }
    check(store, "backbone.up", {std::string(kBackboneWeight)}, vp);

    check(store, "loss_obj", store.names_with_prefix(kGroupObjectHead),
          [&](Tape& t) { return loss_obj(t, model, batch); });
    std::vector<std::string> stage2 = store.names_with_prefix(kGroupStateHead);
    for (const std::string& n : store.names_with_prefix(kGroupObjectToState)) stage2.push_back(n);
    check(store, "loss_state_con", stage2, [&](Tape& t) { return loss_state_con(t, model, batch); });
    check(store, "loss_vp_con", store.names(), vp);

    Batch partial = batch;
    partial.states[0] = -1;
    partial.objects[2] = -1;
    check(store, "loss_vp_con.partial", store.names(),
          [&](Tape& t) { return loss_vp_con(t, model, partial); });
  }

  std::vector<GradCheckEntry> take() { return std::move(results_); }

 private:
  std::mt19937_64 rng_;
  std::uint64_t seed_;
  double tolerance_;
  std::vector<GradCheckEntry> results_;
};

}  // namespace

std::vector<GradCheckEntry> run_gradient_suite(std::uint64_t seed, double tolerance) {
  Suite suite(seed, tolerance);
  suite.run_ops();
  suite.run_model();
  return suite.take();
}

}  // namespace procc
