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

#ifndef PROCC_FEATURE_FILE_HPP_
#define PROCC_FEATURE_FILE_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>

#include "procc/dataset.hpp"

namespace procc {

// Text feature file, version 1:
//
//   czslfeat v1 d=<dim>
//   [states]            one name per line, index = line order
//   [objects]
//   [seen_pairs]        "state_index object_index" per line
//   [val_unseen_pairs]
//   [test_unseen_pairs]
//   [val_seen_pairs]    optional; derived from val records when absent
//   [test_seen_pairs]   optional; derived from test records when absent
//   [records]           id,split,state|-1,object|-1,f1,...,fd
//
// Lines starting with '#' are comments. Reals use the shortest decimal form
// that round-trips exactly.

struct LoadedData {
  Dataset dataset;
  SplitManifest manifest;
};

LoadedData load_features(const std::filesystem::path& path);
LoadedData parse_features(std::istream& in, const std::string& source_name = "<stream>");

void write_features(const std::filesystem::path& path, const Dataset& dataset,
                    const SplitManifest& manifest);
void write_features(std::ostream& out, const Dataset& dataset, const SplitManifest& manifest);

/// Shortest round-trip decimal text for a double.
std::string format_real(double value);
/// Parses the full string as a double; throws DataError otherwise.
double parse_real(std::string_view text);

}  // namespace procc

#endif  // PROCC_FEATURE_FILE_HPP_
