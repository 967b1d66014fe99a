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

#ifndef PROCC_CHECKPOINT_HPP_
#define PROCC_CHECKPOINT_HPP_

#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "procc/model.hpp"

namespace procc {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text format:
//   procc v1
//   <key> <value>            model configuration, one per line
//   params <count>
//   <name> <rows> <cols>     parameter manifest, store order
//   values
//   v v v ...                one line per parameter, manifest order
void save_checkpoint(std::ostream& out, const ProCCModel& model);
void save_checkpoint(const std::filesystem::path& path, const ProCCModel& model);

/// Rebuild a model from the configuration stored in the checkpoint.
ProCCModel load_checkpoint(std::istream& in);
ProCCModel load_checkpoint(const std::filesystem::path& path);

/// Load parameters into an existing model, requiring matching class counts,
/// dimensions and every parameter shape.
void load_checkpoint_into(ProCCModel& model, const std::filesystem::path& path);

}  // namespace procc

#endif  // PROCC_CHECKPOINT_HPP_
