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

#include "procc/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace procc {

std::string_view to_string(BackboneInit b) {
  return b == BackboneInit::kRandom ? "random" : "identity";
}

BackboneInit parse_backbone_init(std::string_view text) {
  if (text == "random") return BackboneInit::kRandom;
  if (text == "identity") return BackboneInit::kIdentity;
  throw std::invalid_argument("unknown backbone init '" + std::string(text) + "'");
}

std::size_t cpm_kernel_size(double fraction, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("cpm_kernel_size: dim must be positive");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("cpm_kernel_size: fraction must lie in (0,1]");
  }
  auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(dim)));
  k = std::clamp<std::size_t>(k, 1, dim);
  if (k % 2 == 0) k = k + 1 <= dim ? k + 1 : k - 1;
  return k;
}

std::size_t ModelConfig::kernel_size() const {
  if (cpm_kernel != 0) return cpm_kernel;
  return cpm_kernel_size(cpm_kernel_fraction, embed_dim);
}

void ModelConfig::validate() const {
  if (n_states == 0 || n_objects == 0) throw std::invalid_argument("model: class counts must be positive");
  if (raw_dim == 0 || embed_dim == 0) throw std::invalid_argument("model: dimensions must be positive");
  if (n_layers == 0) throw std::invalid_argument("model: n_layers must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("model: alpha must lie in [0,1]");
  const std::size_t k = kernel_size();
  if (k % 2 == 0 || k > embed_dim) {
    throw std::invalid_argument("model: CPM kernel length " + std::to_string(k) +
                                " must be odd and at most d=" + std::to_string(embed_dim));
  }
  if (backbone_init == BackboneInit::kIdentity && raw_dim != embed_dim) {
    throw std::invalid_argument("model: identity backbone needs raw_dim == embed_dim");
  }
}

std::string MlpHead::weight_name(std::size_t layer) const {
  return prefix + ".layer" + std::to_string(layer) + ".weight";
}

std::string MlpHead::bias_name(std::size_t layer) const {
  return prefix + ".layer" + std::to_string(layer) + ".bias";
}

namespace {

MlpHead make_head(std::string prefix, const ModelConfig& cfg, std::size_t n_classes) {
  MlpHead head;
  head.prefix = std::move(prefix);
  head.widths.push_back(cfg.embed_dim);
  for (std::size_t i = 1; i < cfg.n_layers; ++i) head.widths.push_back(cfg.embed_dim);
  head.widths.push_back(n_classes);
  return head;
}

// Hidden activation width feeding the final affine layer.
std::size_t penultimate_width(const MlpHead& head) { return head.widths[head.widths.size() - 2]; }

Tensor2 he_normal(std::size_t rows, std::size_t cols, std::size_t fan_in, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  Tensor2 t(rows, cols);
  for (double& v : t.data()) v = normal(rng);
  return t;
}

}  // namespace

ProCCModel::ProCCModel(const ModelConfig& config, std::uint64_t init_seed) : config_(config) {
  config_.validate();
  phi_o_ = make_head("phi_o", config_, config_.n_objects);
  phi_s_ = make_head("phi_s", config_, config_.n_states);
  const std::size_t k = config_.kernel_size();
  cpc_o_to_s_ = CpmUnit{"cpc_o_to_s", CpmDirection::kObjectToState, k, penultimate_width(phi_o_),
                        config_.n_states};
  cpc_s_to_o_ = CpmUnit{"cpc_s_to_o", CpmDirection::kStateToObject, k, penultimate_width(phi_s_),
                        config_.n_objects};

  std::mt19937_64 rng(init_seed);
  if (config_.backbone_init == BackboneInit::kIdentity) {
    params_.add(std::string(kBackboneWeight), Tensor2::identity(config_.embed_dim));
  } else {
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(config_.raw_dim)));
    Tensor2 w(config_.raw_dim, config_.embed_dim);
    for (double& v : w.data()) v = normal(rng);
    params_.add(std::string(kBackboneWeight), std::move(w));
  }
  for (const MlpHead* head : {&phi_o_, &phi_s_}) {
    for (std::size_t l = 1; l <= head->n_layers(); ++l) {
      const std::size_t in = head->widths[l - 1];
      const std::size_t out = head->widths[l];
      params_.add(head->weight_name(l), he_normal(in, out, in, rng));
      params_.add(head->bias_name(l), Tensor2(1, out));
    }
  }
  for (const CpmUnit* unit : {&cpc_o_to_s_, &cpc_s_to_o_}) {
    params_.add(unit->kernel_name(), he_normal(1, unit->kernel_size, unit->kernel_size, rng));
    params_.add(unit->projection_name(), he_normal(unit->input_dim, unit->n_targets, unit->input_dim, rng));
  }
}

void ProCCModel::set_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
  config_.alpha = alpha;
}

// ---------------------------------------------------------------------------

Var embed_graph(Tape& tape, const ProCCModel& model, const Tensor2& raw_batch) {
  const ModelConfig& cfg = model.config();
  if (raw_batch.cols() != cfg.raw_dim) {
    throw ShapeError("backbone: input width " + std::to_string(raw_batch.cols()) +
                     " does not match raw_dim " + std::to_string(cfg.raw_dim));
  }
  Var x = tape.constant(raw_batch);
  Var w = cfg.backbone_trainable ? tape.param(std::string(kBackboneWeight))
                                 : tape.constant(model.params().value(kBackboneWeight));
  return tape.matmul(x, w);
}

namespace {

struct HeadVars {
  Var logits;
  Var hidden;
};

HeadVars head_graph(Tape& tape, const MlpHead& head, Var input) {
  Var h = input;
  Var hidden = input;
  for (std::size_t l = 1; l <= head.n_layers(); ++l) {
    hidden = h;
    Var z = tape.add_row_bias(tape.matmul(h, tape.param(head.weight_name(l))),
                              tape.param(head.bias_name(l)));
    h = l < head.n_layers() ? tape.relu(z) : z;
  }
  return {h, hidden};
}

Var cpm_graph(Tape& tape, const CpmUnit& unit, Var condition) {
  Var conv = tape.conv1d_rows(condition, tape.param(unit.kernel_name()));
  return tape.matmul(conv, tape.param(unit.projection_name()));
}

}  // namespace

ForwardVars forward_graph(Tape& tape, const ProCCModel& model, Var embedding,
                          const ForwardOptions& options) {
  const ModelConfig& cfg = model.config();
  const Tensor2& emb = tape.value(embedding);
  if (emb.cols() != cfg.embed_dim) {
    throw ShapeError("forward: embedding width " + std::to_string(emb.cols()) +
                     " does not match d=" + std::to_string(cfg.embed_dim));
  }
  ForwardVars out;
  out.embedding = embedding;
  const HeadVars obj = head_graph(tape, model.object_head(), embedding);
  const HeadVars st = head_graph(tape, model.state_head(), embedding);
  out.object_logits = obj.logits;
  out.object_hidden = obj.hidden;
  out.state_logits = st.logits;
  out.state_hidden = st.hidden;
  out.object_base_probs = tape.softmax_rows(obj.logits);
  out.state_base_probs = tape.softmax_rows(st.logits);
  if (!options.use_cpc) {
    out.object_probs = out.object_base_probs;
    out.state_probs = out.state_base_probs;
    return out;
  }
  // log of softmax(base) * softmax(compat)^alpha equals base + alpha * compat up
  // to a per-row constant, so the fused distribution is a softmax of the sum.
  Var object_condition = options.detach_object_condition ? tape.detach(obj.hidden) : obj.hidden;
  Var state_compat = cpm_graph(tape, model.object_to_state(), object_condition);
  out.state_probs = tape.softmax_rows(tape.add(st.logits, tape.scale(state_compat, cfg.alpha)));
  Var object_compat = cpm_graph(tape, model.state_to_object(), st.hidden);
  out.object_probs = tape.softmax_rows(tape.add(obj.logits, tape.scale(object_compat, cfg.alpha)));
  return out;
}

ForwardVars forward_graph(Tape& tape, const ProCCModel& model, const Tensor2& raw_batch,
                          const ForwardOptions& options) {
  return forward_graph(tape, model, embed_graph(tape, model, raw_batch), options);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> to_vector(const Tensor2& t) { return t.data(); }

}  // namespace

std::vector<double> backbone_embed(const ProCCModel& model, std::span<const double> raw_feature) {
  Tape tape(model.params());
  return to_vector(tape.value(embed_graph(tape, model, Tensor2::row_vector(raw_feature))));
}

HeadOutput classify_primitive(const ProCCModel& model, const MlpHead& head,
                              std::span<const double> embedding) {
  if (embedding.size() != head.widths.front()) {
    throw ShapeError("classify_primitive: embedding length " + std::to_string(embedding.size()) +
                     " does not match head input " + std::to_string(head.widths.front()));
  }
  Tape tape(model.params());
  const HeadVars vars = head_graph(tape, head, tape.constant(Tensor2::row_vector(embedding)));
  return {to_vector(tape.value(vars.logits)), to_vector(tape.value(vars.hidden))};
}

std::vector<double> cpm_logits(const ProCCModel& model, const CpmUnit& unit,
                               std::span<const double> conditioning_repr) {
  if (conditioning_repr.size() != unit.input_dim) {
    throw ShapeError("cpm: conditioning length " + std::to_string(conditioning_repr.size()) +
                     " does not match " + std::to_string(unit.input_dim));
  }
  Tape tape(model.params());
  return to_vector(tape.value(cpm_graph(tape, unit, tape.constant(Tensor2::row_vector(conditioning_repr)))));
}

std::vector<double> cpm_compatibility(const ProCCModel& model, const CpmUnit& unit,
                                      std::span<const double> conditioning_repr) {
  const std::vector<double> logits = cpm_logits(model, unit, conditioning_repr);
  return softmax(Tensor2::row_vector(logits)).data();
}

std::vector<double> conditioned_probs(std::span<const double> base_logits,
                                      std::span<const double> compatibility, double alpha) {
  if (base_logits.size() != compatibility.size()) {
    throw ShapeError("conditioned_probs: " + std::to_string(base_logits.size()) +
                     " logits vs " + std::to_string(compatibility.size()) + " compatibilities");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("conditioned_probs: alpha must lie in [0,1]");
  std::vector<double> p = softmax(Tensor2::row_vector(base_logits)).data();
  if (alpha == 0.0) return p;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] *= std::pow(compatibility[i], alpha);
    total += p[i];
  }
  if (!(total > 0.0)) throw NonFiniteError("conditioned_probs: product has no mass");
  for (double& v : p) v /= total;
  return p;
}

CompositionOutput forward_composition(const ProCCModel& model, std::span<const double> embedding,
                                      bool use_cpc) {
  Tape tape(model.params());
  Var emb = tape.constant(Tensor2::row_vector(embedding));
  const ForwardVars vars = forward_graph(tape, model, emb, ForwardOptions{use_cpc, false});
  return {to_vector(tape.value(vars.state_probs)), to_vector(tape.value(vars.object_probs)),
          to_vector(tape.value(vars.state_hidden)), to_vector(tape.value(vars.object_hidden))};
}

BatchProbs predict_batch(const ProCCModel& model, const Tensor2& raw_batch, bool use_cpc) {
  Tape tape(model.params());
  const ForwardVars vars = forward_graph(tape, model, raw_batch, ForwardOptions{use_cpc, false});
  return {tape.value(vars.state_probs), tape.value(vars.object_probs)};
}

Tensor2 composition_scores(std::span<const double> p_state, std::span<const double> p_object,
                           const PairMask& space_mask) {
  if (space_mask.n_states() != p_state.size() || space_mask.n_objects() != p_object.size()) {
    throw ShapeError("composition_scores: mask " + std::to_string(space_mask.n_states()) + "x" +
                     std::to_string(space_mask.n_objects()) + " for " +
                     std::to_string(p_state.size()) + " states and " +
                     std::to_string(p_object.size()) + " objects");
  }
  Tensor2 scores(p_state.size(), p_object.size());
  for (std::size_t s = 0; s < p_state.size(); ++s)
    for (std::size_t o = 0; o < p_object.size(); ++o)
      scores(s, o) = space_mask(s, o) ? p_state[s] * p_object[o] : kMaskedScore;
  return scores;
}

std::vector<ScoredPair> rank_pairs(const Tensor2& scores, const PairMask& seen, double bias,
                                   std::size_t k) {
  if (k == 0) throw std::invalid_argument("rank_pairs: k must be >= 1");
  if (seen.n_states() != scores.rows() || seen.n_objects() != scores.cols()) {
    throw ShapeError("rank_pairs: seen mask does not match score matrix " + scores.shape_string());
  }
  std::vector<ScoredPair> cells;
  for (std::size_t s = 0; s < scores.rows(); ++s) {
    for (std::size_t o = 0; o < scores.cols(); ++o) {
      const double v = scores(s, o);
      if (v == kMaskedScore) continue;
      cells.push_back({Pair{static_cast<int>(s), static_cast<int>(o)}, seen(s, o) ? v : v + bias});
    }
  }
  if (k > cells.size()) {
    throw std::invalid_argument("rank_pairs: k=" + std::to_string(k) + " exceeds " +
                                std::to_string(cells.size()) + " unmasked pairs");
  }
  std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(k), cells.end(),
                    [](const ScoredPair& a, const ScoredPair& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.pair < b.pair;
                    });
  cells.resize(k);
  return cells;
}

std::vector<ScoredPair> predict_topk(const ProCCModel& model, std::span<const double> embedding,
                                     const PairMask& space_mask, const PairMask& seen, double bias,
                                     std::size_t k) {
  const CompositionOutput out = forward_composition(model, embedding, model.config().use_cpc);
  return rank_pairs(composition_scores(out.p_state, out.p_object, space_mask), seen, bias, k);
}

}  // namespace procc
