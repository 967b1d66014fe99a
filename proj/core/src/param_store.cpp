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

#include "procc/param_store.hpp"

#include <cstring>
#include <stdexcept>

namespace procc {

void ParamStore::add(const std::string& name, Tensor2 value) {
  if (entries_.contains(name)) throw std::invalid_argument("ParamStore: duplicate name " + name);
  ParamEntry entry;
  entry.grad = Tensor2(value.rows(), value.cols());
  entry.value = std::move(value);
  entries_.emplace(name, std::move(entry));
}

bool ParamStore::contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }

ParamEntry& ParamStore::at(std::string_view name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("ParamStore: unknown parameter " + std::string(name));
  return it->second;
}

const ParamEntry& ParamStore::at(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("ParamStore: unknown parameter " + std::string(name));
  return it->second;
}

void ParamStore::zero_grads() {
  for (auto& [name, entry] : entries_) entry.grad.fill(0.0);
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, entry] : entries_) out.push_back(name);
  return out;
}

std::vector<std::string> ParamStore::names_with_prefix(std::string_view prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, entry] : entries_)
    if (name.starts_with(prefix)) out.push_back(name);
  return out;
}

bool ParamStore::values_equal(const ParamStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  auto it = other.entries_.begin();
  for (const auto& [name, entry] : entries_) {
    if (name != it->first || !entry.value.same_shape(it->second.value)) return false;
    const auto bytes = entry.value.size() * sizeof(double);
    if (bytes != 0 && std::memcmp(entry.value.data().data(), it->second.value.data().data(), bytes) != 0)
      return false;
    ++it;
  }
  return true;
}

bool ParamScope::contains(std::string_view name) const {
  for (const auto& p : prefixes)
    if (name.starts_with(p)) return true;
  return false;
}

}  // namespace procc
