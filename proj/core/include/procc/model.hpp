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

#ifndef PROCC_MODEL_HPP_
#define PROCC_MODEL_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "procc/autodiff.hpp"
#include "procc/dataset.hpp"
#include "procc/param_store.hpp"
#include "procc/tensor.hpp"

namespace procc {

enum class BackboneInit { kRandom, kIdentity };

std::string_view to_string(BackboneInit b);
BackboneInit parse_backbone_init(std::string_view text);

/// Odd kernel length closest to fraction * dim, kept within [1, dim]. An even
/// rounding result moves up by one, or down when that would exceed dim.
std::size_t cpm_kernel_size(double fraction, std::size_t dim);

struct ModelConfig {
  std::size_t n_states = 0;
  std::size_t n_objects = 0;
  std::size_t raw_dim = 64;
  std::size_t embed_dim = 64;  // d; also the hidden width of every MLP layer
  std::size_t n_layers = 3;
  double cpm_kernel_fraction = 0.5;
  std::size_t cpm_kernel = 0;  // explicit length; 0 derives it from the fraction
  double alpha = 1.0;
  bool use_cpc = true;
  bool backbone_trainable = false;
  BackboneInit backbone_init = BackboneInit::kRandom;

  std::size_t kernel_size() const;
  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Layout of one primitive classifier inside the parameter store.
struct MlpHead {
  std::string prefix;                // "phi_o" or "phi_s"
  std::vector<std::size_t> widths;   // d, h, ..., n_classes (n_layers + 1 entries)

  std::size_t n_layers() const { return widths.size() - 1; }
  std::size_t n_classes() const { return widths.back(); }
  std::string weight_name(std::size_t layer) const;  // 1-based
  std::string bias_name(std::size_t layer) const;
};

enum class CpmDirection { kObjectToState, kStateToObject };

/// Cross-primitive memory: conv1d over a conditioning representation, then a
/// projection to the target primitive's classes. Softmax of the result is the
/// compatibility distribution.
struct CpmUnit {
  std::string prefix;  // "cpc_o_to_s" or "cpc_s_to_o"
  CpmDirection direction = CpmDirection::kObjectToState;
  std::size_t kernel_size = 1;
  std::size_t input_dim = 0;
  std::size_t n_targets = 0;

  std::string kernel_name() const { return prefix + ".kernel"; }
  std::string projection_name() const { return prefix + ".proj"; }
};

inline constexpr std::string_view kBackboneWeight = "backbone.weight";

class ProCCModel {
 public:
  ProCCModel(const ModelConfig& config, std::uint64_t init_seed);

  const ModelConfig& config() const { return config_; }
  const MlpHead& object_head() const { return phi_o_; }
  const MlpHead& state_head() const { return phi_s_; }
  const CpmUnit& object_to_state() const { return cpc_o_to_s_; }
  const CpmUnit& state_to_object() const { return cpc_s_to_o_; }

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  void set_alpha(double alpha);
  void set_use_cpc(bool use_cpc) { config_.use_cpc = use_cpc; }
  void set_backbone_trainable(bool trainable) { config_.backbone_trainable = trainable; }

  // Highest progressive stage finished so far (0 = none).
  int stages_completed() const { return stages_completed_; }
  void set_stages_completed(int n) { stages_completed_ = n; }

 private:
  ModelConfig config_;
  MlpHead phi_o_;
  MlpHead phi_s_;
  CpmUnit cpc_o_to_s_;
  CpmUnit cpc_s_to_o_;
  ParamStore params_;
  int stages_completed_ = 0;
};

// Parameter group prefixes.
inline constexpr std::string_view kGroupBackbone = "backbone.";
inline constexpr std::string_view kGroupObjectHead = "phi_o.";
inline constexpr std::string_view kGroupStateHead = "phi_s.";
inline constexpr std::string_view kGroupObjectToState = "cpc_o_to_s.";
inline constexpr std::string_view kGroupStateToObject = "cpc_s_to_o.";

// ---------------------------------------------------------------------------
// Graph construction (shared by training and inference).

struct ForwardOptions {
  bool use_cpc = true;
  // Stage 2: the object branch conditions the state branch without receiving gradient.
  bool detach_object_condition = false;
};

struct ForwardVars {
  Var embedding;
  Var state_logits, object_logits;  // bare heads
  Var state_hidden, object_hidden;  // penultimate activations
  Var state_base_probs, object_base_probs;
  Var state_probs, object_probs;  // conditioned when CPC is on, else equal to base
};

Var embed_graph(Tape& tape, const ProCCModel& model, const Tensor2& raw_batch);
ForwardVars forward_graph(Tape& tape, const ProCCModel& model, Var embedding,
                          const ForwardOptions& options);
ForwardVars forward_graph(Tape& tape, const ProCCModel& model, const Tensor2& raw_batch,
                          const ForwardOptions& options);

// ---------------------------------------------------------------------------
// Per-sample inference.

struct HeadOutput {
  std::vector<double> logits;
  std::vector<double> hidden;  // penultimate activation
};

std::vector<double> backbone_embed(const ProCCModel& model, std::span<const double> raw_feature);
HeadOutput classify_primitive(const ProCCModel& model, const MlpHead& head,
                              std::span<const double> embedding);
std::vector<double> cpm_logits(const ProCCModel& model, const CpmUnit& unit,
                               std::span<const double> conditioning_repr);
std::vector<double> cpm_compatibility(const ProCCModel& model, const CpmUnit& unit,
                                      std::span<const double> conditioning_repr);

/// softmax(base_logits) * compatibility^alpha, renormalized.
std::vector<double> conditioned_probs(std::span<const double> base_logits,
                                      std::span<const double> compatibility, double alpha);

struct CompositionOutput {
  std::vector<double> p_state;
  std::vector<double> p_object;
  std::vector<double> state_hidden;
  std::vector<double> object_hidden;
};

CompositionOutput forward_composition(const ProCCModel& model, std::span<const double> embedding,
                                      bool use_cpc);

/// Primitive probabilities for a batch of raw features.
struct BatchProbs {
  Tensor2 p_state;
  Tensor2 p_object;
};
BatchProbs predict_batch(const ProCCModel& model, const Tensor2& raw_batch, bool use_cpc);

inline constexpr double kMaskedScore = -std::numeric_limits<double>::infinity();

/// score[s][o] = p_state[s] * p_object[o] where the mask allows the pair, -inf elsewhere.
Tensor2 composition_scores(std::span<const double> p_state, std::span<const double> p_object,
                           const PairMask& space_mask);

struct ScoredPair {
  Pair pair;
  double score = 0.0;
  friend bool operator==(const ScoredPair&, const ScoredPair&) = default;
};

/// Rank unmasked cells of a score matrix after adding `bias` to every pair
/// outside `seen`. Ties go to the lower (state, object) index.
std::vector<ScoredPair> rank_pairs(const Tensor2& scores, const PairMask& seen, double bias,
                                   std::size_t k);

std::vector<ScoredPair> predict_topk(const ProCCModel& model, std::span<const double> embedding,
                                     const PairMask& space_mask, const PairMask& seen, double bias,
                                     std::size_t k);

}  // namespace procc

#endif  // PROCC_MODEL_HPP_
