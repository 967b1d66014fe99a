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

#include "procc/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "procc/feature_file.hpp"

namespace procc {

namespace {

std::size_t to_count(const std::string& text, const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw CheckpointError("checkpoint: bad value '" + text + "' for " + key);
  }
}

struct ParsedCheckpoint {
  ModelConfig config;
  int stages_completed = 0;
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> manifest;
  std::vector<std::vector<double>> values;
};

ParsedCheckpoint parse(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "procc v1") {
    throw CheckpointError("checkpoint: missing 'procc v1' header");
  }
  ParsedCheckpoint ck;
  std::map<std::string, std::string> kv;
  std::size_t n_params = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string key, value;
    ss >> key >> value;
    if (key == "params") {
      n_params = to_count(value, key);
      break;
    }
    if (key.empty()) continue;
    kv[key] = value;
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw CheckpointError(std::string("checkpoint: missing key ") + key);
    return it->second;
  };
  ModelConfig& c = ck.config;
  c.n_states = to_count(get("n_states"), "n_states");
  c.n_objects = to_count(get("n_objects"), "n_objects");
  c.raw_dim = to_count(get("raw_dim"), "raw_dim");
  c.embed_dim = to_count(get("embed_dim"), "embed_dim");
  c.n_layers = to_count(get("n_layers"), "n_layers");
  c.cpm_kernel = to_count(get("cpm_kernel"), "cpm_kernel");
  c.alpha = parse_real(get("alpha"));
  c.use_cpc = get("use_cpc") == "1";
  c.backbone_trainable = get("backbone_trainable") == "1";
  c.backbone_init = parse_backbone_init(get("backbone_init"));
  ck.stages_completed = static_cast<int>(to_count(get("stages_completed"), "stages_completed"));

  for (std::size_t i = 0; i < n_params; ++i) {
    if (!std::getline(in, line)) throw CheckpointError("checkpoint: truncated parameter manifest");
    std::istringstream ss(line);
    std::string name, rows, cols;
    if (!(ss >> name >> rows >> cols)) throw CheckpointError("checkpoint: bad manifest line '" + line + "'");
    ck.manifest.push_back({name, {to_count(rows, name), to_count(cols, name)}});
  }
  if (!std::getline(in, line) || line != "values") throw CheckpointError("checkpoint: missing 'values' marker");
  for (const auto& [name, shape] : ck.manifest) {
    if (!std::getline(in, line)) throw CheckpointError("checkpoint: missing values for " + name);
    std::vector<double> vals;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) vals.push_back(parse_real(tok));
    if (vals.size() != shape.first * shape.second) {
      throw CheckpointError("checkpoint: " + name + " has " + std::to_string(vals.size()) +
                            " values, expected " + std::to_string(shape.first * shape.second));
    }
    ck.values.push_back(std::move(vals));
  }
  return ck;
}

void apply(ProCCModel& model, const ParsedCheckpoint& ck) {
  ParamStore& store = model.params();
  if (ck.manifest.size() != store.size()) {
    throw CheckpointError("checkpoint: " + std::to_string(ck.manifest.size()) +
                          " parameters, model has " + std::to_string(store.size()));
  }
  for (std::size_t i = 0; i < ck.manifest.size(); ++i) {
    const auto& [name, shape] = ck.manifest[i];
    if (!store.contains(name)) throw CheckpointError("checkpoint: unknown parameter " + name);
    Tensor2& value = store.value(name);
    if (value.rows() != shape.first || value.cols() != shape.second) {
      throw CheckpointError("checkpoint: shape mismatch for " + name + ": file (" +
                            std::to_string(shape.first) + "x" + std::to_string(shape.second) +
                            "), model " + value.shape_string());
    }
    value = Tensor2(shape.first, shape.second, ck.values[i]);
  }
  model.set_stages_completed(ck.stages_completed);
}

}  // namespace

void save_checkpoint(std::ostream& out, const ProCCModel& model) {
  const ModelConfig& c = model.config();
  out << "procc v1\n";
  out << "n_states " << c.n_states << '\n';
  out << "n_objects " << c.n_objects << '\n';
  out << "raw_dim " << c.raw_dim << '\n';
  out << "embed_dim " << c.embed_dim << '\n';
  out << "n_layers " << c.n_layers << '\n';
  out << "cpm_kernel " << c.kernel_size() << '\n';
  out << "alpha " << format_real(c.alpha) << '\n';
  out << "use_cpc " << (c.use_cpc ? 1 : 0) << '\n';
  out << "backbone_trainable " << (c.backbone_trainable ? 1 : 0) << '\n';
  out << "backbone_init " << to_string(c.backbone_init) << '\n';
  out << "stages_completed " << model.stages_completed() << '\n';
  out << "params " << model.params().size() << '\n';
  for (const auto& [name, entry] : model.params())
    out << name << ' ' << entry.value.rows() << ' ' << entry.value.cols() << '\n';
  out << "values\n";
  for (const auto& [name, entry] : model.params()) {
    bool first = true;
    for (double v : entry.value.data()) {
      if (!first) out << ' ';
      out << format_real(v);
      first = false;
    }
    out << '\n';
  }
}

void save_checkpoint(const std::filesystem::path& path, const ProCCModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  save_checkpoint(out, model);
  if (!out) throw CheckpointError("write failed for " + path.string());
}

ProCCModel load_checkpoint(std::istream& in) {
  const ParsedCheckpoint ck = parse(in);
  ProCCModel model(ck.config, 0);
  apply(model, ck);
  return model;
}

ProCCModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

void load_checkpoint_into(ProCCModel& model, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  const ParsedCheckpoint ck = parse(in);
  const ModelConfig& want = model.config();
  const ModelConfig& have = ck.config;
  if (have.n_states != want.n_states || have.n_objects != want.n_objects ||
      have.raw_dim != want.raw_dim || have.embed_dim != want.embed_dim ||
      have.n_layers != want.n_layers || have.cpm_kernel != want.kernel_size()) {
    throw CheckpointError("checkpoint: model shape does not match the configuration (checkpoint " +
                          std::to_string(have.n_states) + " states, " +
                          std::to_string(have.n_objects) + " objects, d=" +
                          std::to_string(have.embed_dim) + ", layers=" +
                          std::to_string(have.n_layers) + ", kernel=" +
                          std::to_string(have.cpm_kernel) + ")");
  }
  apply(model, ck);
}

}  // namespace procc
