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

#ifndef PROCC_PARAM_STORE_HPP_
#define PROCC_PARAM_STORE_HPP_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "procc/tensor.hpp"

namespace procc {

struct ParamEntry {
  Tensor2 value;
  Tensor2 grad;
  // False until a backward pass has written this entry.
  bool has_grad = false;
};

/// Named parameters with their gradients. Names are dotted paths such as
/// "phi_o.layer1.weight"; iteration order is lexicographic and therefore stable.
class ParamStore {
 public:
  void add(const std::string& name, Tensor2 value);

  bool contains(std::string_view name) const;
  ParamEntry& at(std::string_view name);
  const ParamEntry& at(std::string_view name) const;

  Tensor2& value(std::string_view name) { return at(name).value; }
  const Tensor2& value(std::string_view name) const { return at(name).value; }
  const Tensor2& grad(std::string_view name) const { return at(name).grad; }

  void zero_grads();
  std::vector<std::string> names() const;
  std::vector<std::string> names_with_prefix(std::string_view prefix) const;
  std::size_t size() const { return entries_.size(); }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// True when every value (not gradient) is bit-identical.
  bool values_equal(const ParamStore& other) const;

 private:
  std::map<std::string, ParamEntry, std::less<>> entries_;
};

/// Set of dotted prefixes naming the parameter groups an update may touch.
struct ParamScope {
  std::vector<std::string> prefixes;

  bool contains(std::string_view name) const;
};

}  // namespace procc

#endif  // PROCC_PARAM_STORE_HPP_
