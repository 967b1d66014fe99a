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

#include "procc/cli/run_config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "procc/feature_file.hpp"

namespace procc::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, std::string_view text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("config: " + key + " expects a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& RunConfig::defaults() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"data", ""},
      {"synth.n_states", "16"},
      {"synth.n_objects", "12"},
      {"synth.feature_dim", "64"},
      {"synth.structure", "random"},
      {"synth.density", "0.6"},
      {"synth.seen_fraction", "0.72"},
      {"synth.states_per_object", "1"},
      {"synth.samples_per_seen_pair", "20"},
      {"synth.eval_samples_per_pair", "10"},
      {"synth.noise_sigma", "1"},
      {"synth.state_scale", "1"},
      {"synth.object_scale", "1"},
      {"synth.cover_primitives", "true"},
      {"seed_data", "0"},
      {"seed_init", "0"},
      {"seed_shuffle", "0"},
      {"model.embed_dim", "64"},
      {"model.n_layers", "3"},
      {"model.cpm_kernel_fraction", "0.5"},
      {"model.cpm_kernel", "0"},
      {"model.alpha", "1"},
      {"model.use_cpc", "true"},
      {"model.backbone_init", "random"},
      {"mode", "progressive"},
      {"optimizer", "adam"},
      {"stage1.lr", "0.001"},
      {"stage2.lr", "0.001"},
      {"stage3.lr", "0.001"},
      {"max_epochs", "200"},
      {"batch_size", "128"},
      {"patience", "10"},
      {"labels", "full"},
      {"partial.keep_state", "0.5"},
      {"partial.keep_object", "0.5"},
      {"eval.setting", "closed"},
      {"eval.split", "test"},
      {"eval.n_biases", "101"},
      {"eval.topk", "3"},
      {"eval.topk_records", "20"},
      {"ablate.n_layers", "2,3,4,5"},
      {"ablate.cpm_kernel_fraction", "1/20,1/2,1"},
      {"timing", "wall"},
  };
  return table;
}

RunConfig::RunConfig() {
  for (const auto& [k, v] : defaults()) values_.emplace(k, v);
}

RunConfig RunConfig::from_stream(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    try {
      cfg.assign(line);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return from_stream(in, path.string());
}

void RunConfig::assign(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::get_real(const std::string& key) const {
  try {
    return parse_fraction(get(key));
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + get(key) + "'");
  }
}

std::size_t RunConfig::get_count(const std::string& key) const {
  return static_cast<std::size_t>(parse_u64(key, get(key)));
}

std::uint64_t RunConfig::get_u64(const std::string& key) const { return parse_u64(key, get(key)); }

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: " + key + " expects true/false, got '" + v + "'");
}

std::vector<double> RunConfig::get_real_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : split_list(get(key))) {
    try {
      out.push_back(parse_fraction(item));
    } catch (const std::exception&) {
      throw ConfigError("config: " + key + " has a non-numeric entry '" + item + "'");
    }
  }
  return out;
}

std::vector<std::size_t> RunConfig::get_count_list(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const std::string& item : split_list(get(key))) out.push_back(static_cast<std::size_t>(parse_u64(key, item)));
  return out;
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& [k, unused] : defaults()) out += k + "=" + values_.at(k) + "\n";
  return out;
}

double parse_fraction(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_real(text);
  const double num = parse_real(text.substr(0, slash));
  const double den = parse_real(text.substr(slash + 1));
  if (den == 0.0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  return num / den;
}

}  // namespace procc::cli
