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

#include "procc/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "procc/checkpoint.hpp"
#include "procc/diagnostics.hpp"
#include "procc/feature_file.hpp"
#include "procc/grad_check.hpp"
#include "procc/report.hpp"

namespace procc::cli {

namespace {

constexpr std::uint64_t kPartialSeedSalt = 0x70637A736CULL;

// Runs a configuration-building step, reporting any failure as a usage error.
template <class F>
auto as_config(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

std::filesystem::path require_out(const CommonOptions& options, const char* command) {
  if (!options.out) throw ConfigError(std::string(command) + " needs --out");
  return *options.out;
}

void print_manifest_table(std::ostream& out, const Dataset& ds, const SplitManifest& m) {
  std::set<Pair> train_pairs;
  for (std::size_t i : ds.indices(Split::kTrain)) {
    const LabelPair& l = ds.records[i].label;
    if (l.complete()) train_pairs.insert({*l.state, *l.object});
  }
  out << std::left << std::setw(8) << "states" << std::setw(9) << "objects" << std::setw(6) << "C^s"
      << std::setw(8) << "C" << std::setw(12) << "train:C^s" << std::setw(8) << "images" << std::setw(10)
      << "val:C^s" << std::setw(8) << "C^u" << std::setw(8) << "images" << std::setw(11) << "test:C^s"
      << std::setw(8) << "C^u" << std::setw(8) << "images" << "ow_ratio\n";
  out << std::setw(8) << m.n_states() << std::setw(9) << m.n_objects() << std::setw(6) << m.seen_pairs.size()
      << std::setw(8) << m.full_space() << std::setw(12) << train_pairs.size() << std::setw(8)
      << ds.count(Split::kTrain) << std::setw(10) << m.seen_in(Split::kVal).size() << std::setw(8)
      << m.val_unseen_pairs.size() << std::setw(8) << ds.count(Split::kVal) << std::setw(11)
      << m.seen_in(Split::kTest).size() << std::setw(8) << m.test_unseen_pairs.size() << std::setw(8)
      << ds.count(Split::kTest) << fixed(openworld_expansion_ratio(m), 2) << '\n'
      << std::right;
}

bool timing_enabled(const RunConfig& config) {
  const std::string& t = config.get("timing");
  if (t == "wall") return true;
  if (t == "off") return false;
  throw ConfigError("config: timing must be wall or off, got '" + t + "'");
}

EvalSetting parse_setting(const std::string& text) {
  if (text == "closed") return EvalSetting::kClosed;
  if (text == "open") return EvalSetting::kOpen;
  throw ConfigError("config: eval.setting must be closed or open, got '" + text + "'");
}

void write_topk(const std::filesystem::path& path, const ProCCModel& model, const World& world,
                Split split, const PairMask& space, const PairMask& seen, std::size_t k,
                std::size_t max_records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ReportError("cannot write " + path.string());
  out << "record,rank,state,object,score,true_state,true_object\n";
  const std::size_t cap = std::min(k, space.count());
  std::size_t written = 0;
  for (std::size_t i : world.dataset.indices(split)) {
    if (written == max_records) break;
    const FeatureRecord& rec = world.dataset.records[i];
    const std::vector<double> emb = backbone_embed(model, rec.feature);
    const std::vector<ScoredPair> top = predict_topk(model, emb, space, seen, 0.0, cap);
    for (std::size_t r = 0; r < top.size(); ++r) {
      out << rec.id << ',' << r + 1 << ',' << world.manifest.state_names[top[r].pair.state] << ','
          << world.manifest.object_names[top[r].pair.object] << ',' << format_real(top[r].score) << ','
          << (rec.label.state ? world.manifest.state_names[*rec.label.state] : "-") << ','
          << (rec.label.object ? world.manifest.object_names[*rec.label.object] : "-") << '\n';
    }
    ++written;
  }
  if (!out) throw ReportError("write failed for " + path.string());
}

}  // namespace

RunConfig resolve_config(const CommonOptions& options) {
  RunConfig cfg = options.config ? RunConfig::from_file(*options.config) : RunConfig();
  for (const std::string& o : options.overrides) cfg.assign(o);
  if (options.seed_data) cfg.set("seed_data", std::to_string(*options.seed_data));
  if (options.seed_init) cfg.set("seed_init", std::to_string(*options.seed_init));
  if (options.seed_shuffle) cfg.set("seed_shuffle", std::to_string(*options.seed_shuffle));
  return cfg;
}

SyntheticWorldConfig synthetic_config(const RunConfig& c) {
  return as_config("synthetic world", [&] {
    SyntheticWorldConfig s;
    s.n_states = c.get_count("synth.n_states");
    s.n_objects = c.get_count("synth.n_objects");
    s.feature_dim = c.get_count("synth.feature_dim");
    s.structure = parse_feasibility_structure(c.get("synth.structure"));
    s.feasibility_density = c.get_real("synth.density");
    s.seen_fraction = c.get_real("synth.seen_fraction");
    s.states_per_object = c.get_count("synth.states_per_object");
    s.samples_per_seen_pair = c.get_count("synth.samples_per_seen_pair");
    s.eval_samples_per_pair = c.get_count("synth.eval_samples_per_pair");
    s.noise_sigma = c.get_real("synth.noise_sigma");
    s.state_scale = c.get_real("synth.state_scale");
    s.object_scale = c.get_real("synth.object_scale");
    s.cover_primitives = c.get_bool("synth.cover_primitives");
    s.seed = c.get_u64("seed_data");
    return s;
  });
}

World load_world(const RunConfig& config, const std::optional<std::filesystem::path>& data_override) {
  std::filesystem::path path = data_override.value_or(std::filesystem::path(config.get("data")));
  if (!path.empty()) {
    LoadedData loaded = load_features(path);
    return World{std::move(loaded.dataset), std::move(loaded.manifest), std::nullopt};
  }
  const SyntheticWorldConfig sc = synthetic_config(config);
  SyntheticWorld w = as_config("data config", [&] { return generate_synthetic_world(sc); });
  return World{std::move(w.dataset), std::move(w.manifest), std::move(w.feasibility)};
}

ModelConfig model_config(const RunConfig& c, const SplitManifest& manifest, std::size_t raw_dim) {
  return as_config("model", [&] {
    ModelConfig m;
    m.n_states = manifest.n_states();
    m.n_objects = manifest.n_objects();
    m.raw_dim = raw_dim;
    m.embed_dim = c.get_count("model.embed_dim");
    m.n_layers = c.get_count("model.n_layers");
    m.cpm_kernel_fraction = c.get_real("model.cpm_kernel_fraction");
    m.cpm_kernel = c.get_count("model.cpm_kernel");
    m.alpha = c.get_real("model.alpha");
    m.use_cpc = c.get_bool("model.use_cpc");
    m.backbone_init = parse_backbone_init(c.get("model.backbone_init"));
    m.backbone_trainable = parse_train_mode(c.get("mode")) == TrainMode::kJointUp;
    m.validate();
    return m;
  });
}

std::array<StageConfig, 3> stage_configs(const RunConfig& c) {
  return as_config("stage", [&] {
    std::array<StageConfig, 3> out;
    const OptimizerMode mode = parse_optimizer_mode(c.get("optimizer"));
    for (int k = 0; k < 3; ++k) {
      StageConfig& s = out[k];
      s.stage = k + 1;
      s.optimizer.mode = mode;
      s.optimizer.learning_rate = c.get_real("stage" + std::to_string(k + 1) + ".lr");
      s.max_epochs = c.get_count("max_epochs");
      s.batch_size = c.get_count("batch_size");
      s.patience = c.get_count("patience");
      s.validate();
    }
    return out;
  });
}

TrainMode parse_train_mode(const std::string& text) {
  if (text == "progressive") return TrainMode::kProgressive;
  if (text == "joint") return TrainMode::kJoint;
  if (text == "joint_up") return TrainMode::kJointUp;
  throw ConfigError("config: mode must be progressive, joint or joint_up, got '" + text + "'");
}

TrainOutcome train_model(const RunConfig& config, const World& world) {
  const TrainMode mode = parse_train_mode(config.get("mode"));
  const ModelConfig mc = model_config(config, world.manifest, world.dataset.feature_dim);
  const std::array<StageConfig, 3> stages = stage_configs(config);
  const bool timing = timing_enabled(config);

  Dataset train_data = world.dataset;
  const std::string& labels = config.get("labels");
  if (labels == "partial") {
    const double ks = config.get_real("partial.keep_state");
    const double ko = config.get_real("partial.keep_object");
    train_data = as_config("partial labels", [&] {
      return mask_partial_labels(world.dataset, ks, ko, config.get_u64("seed_data") ^ kPartialSeedSalt,
                                 Split::kTrain);
    });
  } else if (labels != "full") {
    throw ConfigError("config: labels must be full or partial, got '" + labels + "'");
  }

  TrainOutcome outcome{ProCCModel(mc, config.get_u64("seed_init")), {}, 0.0};
  TrainContext ctx{&train_data, &world.manifest, config.get_u64("seed_shuffle"), timing};
  const auto start = std::chrono::steady_clock::now();
  if (mode == TrainMode::kProgressive) {
    for (TrainReport& r : run_progressive(outcome.model, ctx, stages)) outcome.reports.push_back(std::move(r));
  } else {
    outcome.reports.push_back(run_joint(outcome.model, ctx, stages[2]));
  }
  if (timing) {
    outcome.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return outcome;
}

EvalOutcome evaluate_model(const ProCCModel& model, const RunConfig& config, const World& world) {
  EvalOutcome out;
  out.setting = parse_setting(config.get("eval.setting"));
  out.split = as_config("eval.split", [&] { return parse_split(config.get("eval.split")); });
  if (out.split == Split::kTrain) throw ConfigError("config: eval.split must be val or test");
  const std::size_t n_biases = config.get_count("eval.n_biases");
  if (n_biases < 2) throw ConfigError("config: eval.n_biases must be at least 2");
  const SplitManifest& m = world.manifest;
  const PairMask space = space_mask_for(m, out.split, out.setting);
  const PairMask seen = PairMask::from_pairs(m.n_states(), m.n_objects(), m.seen_pairs);
  out.summary = sweep_metrics(model, world.dataset, out.split, space, seen, n_biases);
  return out;
}

int cmd_gen_data(const CommonOptions& options, std::ostream& out) {
  const RunConfig config = resolve_config(options);
  const std::filesystem::path path = require_out(options, "gen-data");
  const SyntheticWorldConfig sc = synthetic_config(config);
  const SyntheticWorld w = as_config("data config", [&] { return generate_synthetic_world(sc); });
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_features(path, w.dataset, w.manifest);
  print_manifest_table(out, w.dataset, w.manifest);
  out << "wrote " << path.string() << '\n';
  return kExitOk;
}

int cmd_train(const CommonOptions& options, std::ostream& out) {
  const RunConfig config = resolve_config(options);
  const std::filesystem::path dir = require_out(options, "train");
  parse_train_mode(config.get("mode"));
  timing_enabled(config);
  const World world = load_world(config);
  const TrainOutcome t = train_model(config, world);

  std::filesystem::create_directories(dir);
  write_text_file(dir / "config.txt", config.dump());
  for (const TrainReport& r : t.reports) {
    write_stage_report(dir / ("report_stage" + std::to_string(r.stage) + ".csv"), r);
    out << "stage " << r.stage << ": epochs=" << r.epochs.size() << " best_epoch=" << r.best_epoch
        << " best_val=" << fixed(r.best_val_metric) << " stop=" << to_string(r.stop)
        << " seconds=" << fixed(r.wall_seconds, 3) << '\n';
  }
  save_checkpoint(dir / "checkpoint_final", t.model);
  write_text_file(dir / "walltime.txt",
                  timing_enabled(config) ? format_real(t.wall_seconds) + "\n" : std::string("off\n"));
  out << "total wall time: " << fixed(t.wall_seconds, 3) << " s\n";
  return kExitOk;
}

int cmd_eval(const CommonOptions& options, const std::filesystem::path& checkpoint,
             const std::optional<std::filesystem::path>& data, std::ostream& out) {
  const RunConfig config = resolve_config(options);
  const std::filesystem::path dir = require_out(options, "eval");
  const World world = load_world(config, data);
  const ProCCModel model = load_checkpoint(checkpoint);
  if (model.config().n_states != world.manifest.n_states() ||
      model.config().n_objects != world.manifest.n_objects() ||
      model.config().raw_dim != world.dataset.feature_dim) {
    throw ShapeError("checkpoint expects " + std::to_string(model.config().n_states) + " states, " +
                     std::to_string(model.config().n_objects) + " objects and " +
                     std::to_string(model.config().raw_dim) + " features; data has " +
                     std::to_string(world.manifest.n_states()) + ", " +
                     std::to_string(world.manifest.n_objects()) + " and " +
                     std::to_string(world.dataset.feature_dim));
  }
  const EvalOutcome e = evaluate_model(model, config, world);
  std::vector<ConditionalConfusion> confusions;
  for (CpmDirection dir_kind : {CpmDirection::kObjectToState, CpmDirection::kStateToObject})
    for (bool cpc : {false, true})
      confusions.push_back(conditional_confusion(model, world.dataset, e.split, dir_kind, cpc));
  export_report(dir, e.summary, confusions, {},
                std::string("ProCC evaluation (") + (e.setting == EvalSetting::kOpen ? "open" : "closed") +
                    " world, " + std::string(to_string(e.split)) + " split)");
  const std::size_t k = config.get_count("eval.topk");
  if (k > 0) {
    const SplitManifest& m = world.manifest;
    write_topk(dir / "topk.csv", model, world, e.split, space_mask_for(m, e.split, e.setting),
               PairMask::from_pairs(m.n_states(), m.n_objects(), m.seen_pairs), k,
               config.get_count("eval.topk_records"));
  }
  out << "S=" << fixed(e.summary.best_seen) << " U=" << fixed(e.summary.best_unseen)
      << " HM=" << fixed(e.summary.best_hm) << " AUC=" << fixed(e.summary.auc) << '\n';
  return kExitOk;
}

int cmd_grad_check(std::uint64_t seed, std::ostream& out) {
  const std::vector<GradCheckEntry> results = run_gradient_suite(seed);
  std::size_t failed = 0;
  for (const GradCheckEntry& r : results) {
    char err[32];
    std::snprintf(err, sizeof err, "%.3e", r.max_rel_error);
    out << std::left << std::setw(26) << r.component << std::setw(10) << err << (r.passed ? "PASS" : "FAIL")
        << '\n'
        << std::right;
    failed += r.passed ? 0 : 1;
  }
  out << results.size() << " checks, " << failed << " failed (tolerance " << kGradCheckTolerance << ")\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

int cmd_ablate(const CommonOptions& options, std::ostream& out) {
  const RunConfig base = resolve_config(options);
  const std::filesystem::path dir = require_out(options, "ablate");
  const std::vector<std::size_t> layers = base.get_count_list("ablate.n_layers");
  const std::vector<double> fractions = base.get_real_list("ablate.cpm_kernel_fraction");
  const World world = load_world(base);

  struct Row {
    std::string name;
    RunConfig config;
  };
  std::vector<Row> rows;
  for (std::size_t l : layers) {
    Row r{"layers=" + std::to_string(l), base};
    r.config.set("model.n_layers", std::to_string(l));
    rows.push_back(std::move(r));
  }
  for (double f : fractions) {
    Row r{"cpm_fraction=" + format_real(f), base};
    r.config.set("model.cpm_kernel_fraction", format_real(f));
    r.config.set("model.cpm_kernel", "0");
    rows.push_back(std::move(r));
  }
  rows.push_back({"baseline", base});

  std::ostringstream csv;
  csv << "setting,n_layers,cpm_kernel,S,U,HM,AUC\n";
  for (const Row& r : rows) {
    const TrainOutcome t = train_model(r.config, world);
    const EvalOutcome e = evaluate_model(t.model, r.config, world);
    const ModelConfig& mc = t.model.config();
    csv << r.name << ',' << mc.n_layers << ',' << mc.kernel_size() << ',' << format_real(e.summary.best_seen)
        << ',' << format_real(e.summary.best_unseen) << ',' << format_real(e.summary.best_hm) << ','
        << format_real(e.summary.auc) << '\n';
    out << std::left << std::setw(22) << r.name << std::right << " S=" << fixed(e.summary.best_seen)
        << " U=" << fixed(e.summary.best_unseen) << " HM=" << fixed(e.summary.best_hm)
        << " AUC=" << fixed(e.summary.auc) << '\n';
  }
  std::filesystem::create_directories(dir);
  write_text_file(dir / "config.txt", base.dump());
  write_text_file(dir / "ablation.csv", csv.str());
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"State/object composition recognition with cross-primitive compatibility", "procc"};
  app.require_subcommand(1);
  CommonOptions common;
  std::string checkpoint;
  std::optional<std::filesystem::path> data;
  std::uint64_t grad_seed = 0;

  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", common.config, "key=value config file")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output path");
    sub->add_option("--seed-data", common.seed_data, "dataset seed");
    sub->add_option("--seed-init", common.seed_init, "parameter init seed");
    sub->add_option("--seed-shuffle", common.seed_shuffle, "batch shuffle seed");
    sub->add_option("--set", common.overrides, "extra key=value assignment (repeatable)");
  };
  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic feature file");
  add_common(gen, true);
  CLI::App* train = app.add_subcommand("train", "train a model into a run directory");
  add_common(train, true);
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint and write reports");
  add_common(eval, true);
  eval->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  eval->add_option("--data", data, "feature file (defaults to the config's data source)");
  CLI::App* grad = app.add_subcommand("grad-check", "finite-difference gradient suite");
  grad->add_option("--seed", grad_seed, "instance seed");
  CLI::App* ablate = app.add_subcommand("ablate", "architecture ablation table");
  add_common(ablate, true);

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << e.what() << '\n';
      return kExitOk;
    }
    err << "procc: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(common, out);
    if (train->parsed()) return cmd_train(common, out);
    if (eval->parsed()) return cmd_eval(common, checkpoint, data, out);
    if (grad->parsed()) return cmd_grad_check(grad_seed, out);
    if (ablate->parsed()) return cmd_ablate(common, out);
  } catch (const ConfigError& e) {
    err << "procc: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "procc: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace procc::cli
