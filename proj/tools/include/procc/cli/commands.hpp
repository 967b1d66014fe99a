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

#ifndef PROCC_CLI_COMMANDS_HPP_
#define PROCC_CLI_COMMANDS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "procc/cli/run_config.hpp"
#include "procc/dataset.hpp"
#include "procc/metrics.hpp"
#include "procc/model.hpp"
#include "procc/synthetic.hpp"
#include "procc/trainer.hpp"

namespace procc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Flags shared by every command. Explicit flags win over the config file.
struct CommonOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed_data;
  std::optional<std::uint64_t> seed_init;
  std::optional<std::uint64_t> seed_shuffle;
  std::vector<std::string> overrides;  // key=value
};

RunConfig resolve_config(const CommonOptions& options);

struct World {
  Dataset dataset;
  SplitManifest manifest;
  std::optional<PairMask> feasibility;  // synthetic worlds only
};

SyntheticWorldConfig synthetic_config(const RunConfig& config);
/// Loads `data_override`, else the config's `data` file, else generates the synthetic world.
World load_world(const RunConfig& config, const std::optional<std::filesystem::path>& data_override = {});

ModelConfig model_config(const RunConfig& config, const SplitManifest& manifest, std::size_t raw_dim);
std::array<StageConfig, 3> stage_configs(const RunConfig& config);

enum class TrainMode { kProgressive, kJoint, kJointUp };
TrainMode parse_train_mode(const std::string& text);

struct TrainOutcome {
  ProCCModel model;
  std::vector<TrainReport> reports;
  double wall_seconds = 0.0;
};

/// Builds the model from the config and trains it in the configured mode,
/// applying partial-label masking to the train split when enabled.
TrainOutcome train_model(const RunConfig& config, const World& world);

struct EvalOutcome {
  MetricsSummary summary;
  EvalSetting setting = EvalSetting::kClosed;
  Split split = Split::kTest;
};

EvalOutcome evaluate_model(const ProCCModel& model, const RunConfig& config, const World& world);

int cmd_gen_data(const CommonOptions& options, std::ostream& out);
int cmd_train(const CommonOptions& options, std::ostream& out);
int cmd_eval(const CommonOptions& options, const std::filesystem::path& checkpoint,
             const std::optional<std::filesystem::path>& data, std::ostream& out);
int cmd_grad_check(std::uint64_t seed, std::ostream& out);
int cmd_ablate(const CommonOptions& options, std::ostream& out);

/// Full command-line entry point; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace procc::cli

#endif  // PROCC_CLI_COMMANDS_HPP_
