/*
 * Copyright 2026 the gan-detect-lab authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gdl/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>

#include "gdl/errors.hpp"
#include "gdl/hashutil.hpp"
#include "gdl/report.hpp"
#include "gdl/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gdl {

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
  throw ConfigInvalid(path, what);
}

void check_keys(const json& j, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) bad_field(path, "expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) bad_field(path + "." + key, "unknown field");
}

template <typename T>
T get_or(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad_field(path + "." + key, "wrong type");
  }
}

template <typename T>
T get_req(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) bad_field(path + "." + key, "missing required field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad_field(path + "." + key, "wrong type");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (name.empty()) bad_field("name", "must be non-empty");
  if (dataset.root.empty()) bad_field("dataset.root", "must be non-empty");
  if (dataset.categories.empty())
    bad_field("dataset.categories", "must be non-empty");
  std::set<std::string> unique(dataset.categories.begin(),
                               dataset.categories.end());
  if (unique.size() != dataset.categories.size())
    bad_field("dataset.categories", "categories must be unique");
  if (dataset.val_fraction < 0.0 || dataset.val_fraction >= 1.0)
    bad_field("dataset.val_fraction", "must lie in [0,1)");
  if (class_subset_k < 0 ||
      class_subset_k > static_cast<int>(dataset.categories.size()))
    bad_field("class_subset_k", "must lie in [1, #categories]");
  policy.validate();
  detector.validate();
  train.validate();
  if (minmax_sample < 1) bad_field("minmax_sample", "must be >= 1");
  if (test_root.empty()) bad_field("test_root", "must be non-empty");
  if (test_sets.empty()) bad_field("test_sets", "must be non-empty");
  if (output_dir.empty()) bad_field("output_dir", "must be non-empty");
}

ExperimentConfig parse_experiment_config(const json& j) {
  check_keys(j, "config",
             {"name", "tag", "row_label", "group_label", "dataset",
              "class_subset_k", "policy", "detector", "train",
              "minmax_sample", "test_root", "test_sets", "output_dir",
              "log_augmentations", "reuse_of"});
  ExperimentConfig cfg;
  cfg.name = get_req<std::string>(j, "config", "name");
  cfg.tag = get_or<std::string>(j, "config", "tag", "reproduced");
  cfg.row_label = get_or<std::string>(j, "config", "row_label", cfg.name);
  cfg.group_label = get_or<std::string>(j, "config", "group_label", "");

  const json& d = j.contains("dataset") ? j.at("dataset") : json::object();
  check_keys(d, "dataset",
             {"root", "categories", "val_fraction", "split_seed", "generator",
              "verify_decode"});
  cfg.dataset.root = get_req<std::string>(d, "dataset", "root");
  cfg.dataset.categories =
      get_req<std::vector<std::string>>(d, "dataset", "categories");
  cfg.dataset.val_fraction = get_or<double>(d, "dataset", "val_fraction", 0.10);
  cfg.dataset.split_seed = get_or<uint64_t>(d, "dataset", "split_seed", 0);
  cfg.dataset.generator =
      get_or<std::string>(d, "dataset", "generator", "progan");
  cfg.dataset.verify_decode =
      get_or<bool>(d, "dataset", "verify_decode", false);

  cfg.class_subset_k =
      get_or<int>(j, "config", "class_subset_k",
                  static_cast<int>(cfg.dataset.categories.size()));

  const json& p = j.contains("policy") ? j.at("policy") : json::object();
  check_keys(p, "policy", {"kind", "p", "sigma_range", "quality_range"});
  const std::string kind = get_req<std::string>(p, "policy", "kind");
  if (!policy_kind_from_string(kind, &cfg.policy.kind))
    bad_field("policy.kind", "unknown policy kind '" + kind + "'");
  cfg.policy.p = get_or<double>(p, "policy", "p", 0.5);
  cfg.policy.sigma_range =
      get_or<std::array<double, 2>>(p, "policy", "sigma_range", {0.0, 3.0});
  cfg.policy.quality_range =
      get_or<std::array<int, 2>>(p, "policy", "quality_range", {30, 100});

  const json& det = j.contains("detector") ? j.at("detector") : json::object();
  check_keys(det, "detector",
             {"backbone", "pretrained", "input_domain", "weights_dir"});
  const std::string backbone = get_req<std::string>(det, "detector", "backbone");
  if (!backbone_from_string(backbone, &cfg.detector.backbone))
    bad_field("detector.backbone", "unknown backbone '" + backbone + "'");
  const DetectorConfig defaults =
      DetectorConfig::defaults_for(cfg.detector.backbone);
  cfg.detector.pretrained =
      get_or<bool>(det, "detector", "pretrained", defaults.pretrained);
  const std::string domain = get_or<std::string>(
      det, "detector", "input_domain", to_string(defaults.input_domain));
  if (!input_domain_from_string(domain, &cfg.detector.input_domain))
    bad_field("detector.input_domain", "unknown input domain '" + domain + "'");
  if (det.contains("weights_dir"))
    cfg.weights_dir = get_req<std::string>(det, "detector", "weights_dir");

  const json& t = j.contains("train") ? j.at("train") : json::object();
  check_keys(t, "train",
             {"beta1", "beta2", "batch_size", "lr_init", "lr_drop_factor",
              "plateau_patience", "lr_terminate", "seed", "max_epochs"});
  cfg.train.beta1 = get_or<double>(t, "train", "beta1", 0.9);
  cfg.train.beta2 = get_or<double>(t, "train", "beta2", 0.999);
  cfg.train.batch_size = get_or<int>(t, "train", "batch_size", 64);
  cfg.train.lr_init = get_or<double>(
      t, "train", "lr_init",
      cfg.detector.input_domain == InputDomain::spectral ? 1e-3 : 1e-4);
  cfg.train.lr_drop_factor = get_or<double>(t, "train", "lr_drop_factor", 10.0);
  cfg.train.plateau_patience = get_or<int>(t, "train", "plateau_patience", 5);
  cfg.train.lr_terminate = get_or<double>(t, "train", "lr_terminate", 1e-7);
  cfg.train.seed = get_or<uint64_t>(t, "train", "seed", 0);
  cfg.train.max_epochs = get_or<int>(t, "train", "max_epochs", 400);

  cfg.minmax_sample = get_or<int>(j, "config", "minmax_sample", 10000);
  cfg.test_root = get_req<std::string>(j, "config", "test_root");
  cfg.test_sets = get_req<std::vector<std::string>>(j, "config", "test_sets");
  cfg.output_dir = get_req<std::string>(j, "config", "output_dir");
  cfg.log_augmentations = get_or<bool>(j, "config", "log_augmentations", false);
  cfg.reuse_of = get_or<std::string>(j, "config", "reuse_of", "");

  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigInvalid("config", "cannot open " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigInvalid("config", std::string("json parse error: ") + e.what());
  }
  return parse_experiment_config(j);
}

json experiment_config_json(const ExperimentConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["tag"] = cfg.tag;
  j["row_label"] = cfg.row_label;
  j["group_label"] = cfg.group_label;
  j["dataset"] = {{"root", cfg.dataset.root.generic_string()},
                  {"categories", cfg.dataset.categories},
                  {"val_fraction", cfg.dataset.val_fraction},
                  {"split_seed", cfg.dataset.split_seed},
                  {"generator", cfg.dataset.generator},
                  {"verify_decode", cfg.dataset.verify_decode}};
  j["class_subset_k"] = cfg.class_subset_k;
  j["policy"] = {{"kind", to_string(cfg.policy.kind)},
                 {"p", cfg.policy.p},
                 {"sigma_range", cfg.policy.sigma_range},
                 {"quality_range", cfg.policy.quality_range}};
  j["detector"] = {{"backbone", to_string(cfg.detector.backbone)},
                   {"pretrained", cfg.detector.pretrained},
                   {"input_domain", to_string(cfg.detector.input_domain)}};
  if (cfg.weights_dir)
    j["detector"]["weights_dir"] = cfg.weights_dir->generic_string();
  j["train"] = {{"beta1", cfg.train.beta1},
                {"beta2", cfg.train.beta2},
                {"batch_size", cfg.train.batch_size},
                {"lr_init", cfg.train.lr_init},
                {"lr_drop_factor", cfg.train.lr_drop_factor},
                {"plateau_patience", cfg.train.plateau_patience},
                {"lr_terminate", cfg.train.lr_terminate},
                {"seed", cfg.train.seed},
                {"max_epochs", cfg.train.max_epochs}};
  j["minmax_sample"] = cfg.minmax_sample;
  j["test_root"] = cfg.test_root.generic_string();
  j["test_sets"] = cfg.test_sets;
  j["output_dir"] = cfg.output_dir.generic_string();
  j["log_augmentations"] = cfg.log_augmentations;
  j["reuse_of"] = cfg.reuse_of;
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  return sha256_hex(experiment_config_json(cfg).dump());
}

void apply_desk_scale(ExperimentConfig& cfg, const fs::path& workspace,
                      const DeskScaleOptions& opts) {
  SynthSpec spec;
  spec.per_class_real = opts.per_class_real;
  spec.per_class_fake = opts.per_class_fake;

  const fs::path train_root = workspace / "synth" / "train";
  const fs::path test_root = workspace / "synth" / "test";
  // corpus generation is cached: regenerate only when the marker is missing
  const fs::path marker = workspace / "synth" / ".complete";
  if (!fs::exists(marker)) {
    generate_training_corpus(train_root, spec, opts.corpus_seed);
    SynthSpec test_spec = spec;
    test_spec.per_class_real = opts.test_per_class;
    test_spec.per_class_fake = opts.test_per_class;
    generate_test_set(test_root / "held_out", test_spec, opts.test_per_class,
                      opts.test_per_class, opts.corpus_seed + 1);
    std::ofstream(marker) << "ok\n";
  }

  cfg.dataset.root = train_root;
  cfg.dataset.categories = spec.categories;
  cfg.dataset.generator = "synthetic";
  cfg.class_subset_k = static_cast<int>(spec.categories.size());
  cfg.detector.backbone = Backbone::tiny_cnn;
  cfg.detector.pretrained = false;
  cfg.train.lr_init = opts.lr_init;
  cfg.train.max_epochs = std::min(cfg.train.max_epochs, opts.max_epochs);
  cfg.test_root = test_root;
  cfg.test_sets = {"held_out"};
}

RunArtifacts run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunArtifacts art;
  art.run_dir = cfg.output_dir / cfg.name;
  fs::create_directories(art.run_dir);
  art.checkpoint = art.run_dir / "checkpoint.gdlt";
  art.history_csv = art.run_dir / "history.csv";
  art.report_csv = art.run_dir / "report.csv";
  art.report_md = art.run_dir / "report.md";
  art.manifest_json = art.run_dir / "manifest.json";

  std::vector<ImageRecord> records = scan_dataset(cfg.dataset);
  const int k = cfg.class_subset_k == 0
                    ? static_cast<int>(cfg.dataset.categories.size())
                    : cfg.class_subset_k;
  records = subset_classes(records, k, cfg.dataset.categories);
  const Split split = split_train_val(records, cfg.dataset.val_fraction,
                                      cfg.dataset.split_seed);

  Detector detector =
      build_detector(cfg.detector, cfg.train.seed, cfg.weights_dir);

  std::optional<MinMaxScaler> scaler;
  if (cfg.detector.input_domain == InputDomain::spectral) {
    scaler = fit_minmax_on_split(
        split.train, std::min<int>(cfg.minmax_sample,
                                   static_cast<int>(split.train.size()) * 4),
        cfg.train.seed);
    scaler->save(art.run_dir / "scaler.gdlt");
  }

  TrainSinks sinks;
  sinks.checkpoint_path = art.checkpoint;
  sinks.history_csv = art.history_csv;
  if (cfg.log_augmentations)
    sinks.augmentation_log_csv = art.run_dir / "augmentations.csv";

  art.train_state = train_detector(detector, split, cfg.policy, cfg.train,
                                   scaler ? &*scaler : nullptr, sinks);

  std::unique_ptr<EvalPreprocessor> preproc;
  if (cfg.detector.input_domain == InputDomain::spectral)
    preproc = std::make_unique<SpectralPreprocessor>(&*scaler);
  else
    preproc = std::make_unique<SpatialPreprocessor>();

  art.report = evaluate_testsets(detector, *preproc, cfg.test_root,
                                 cfg.test_sets,
                                 EvalOptions{cfg.train.batch_size, kCropSize});
  art.report.name = cfg.name;
  art.report.tag = cfg.tag;
  art.report.row_label = cfg.row_label;
  art.report.group_label = cfg.group_label;
  art.report.seed = cfg.train.seed;
  art.report.config_hash = config_hash(cfg);
  art.report.checkpoint_id = sha256_file_hex(art.checkpoint).substr(0, 16);

  write_report_csv(art.report, art.report_csv);
  {
    std::ofstream md(art.report_md, std::ios::trunc);
    md << "| Run | Result |";
    for (const auto& [set, _] : art.report.per_set_ap) md << ' ' << set << " |";
    md << " mAP |\n|";
    for (size_t i = 0; i < art.report.per_set_ap.size() + 3; ++i) md << "---|";
    md << "\n| " << art.report.name << " | " << art.report.tag << " |";
    char buf[32];
    for (const auto& [_, ap] : art.report.per_set_ap) {
      std::snprintf(buf, sizeof(buf), " %.1f |", ap);
      md << buf;
    }
    std::snprintf(buf, sizeof(buf), " %.1f |", art.report.map_percent);
    md << buf << "\n";
  }

  json manifest;
  manifest["name"] = cfg.name;
  manifest["config"] = experiment_config_json(cfg);
  manifest["config_hash"] = art.report.config_hash;
  manifest["seed"] = cfg.train.seed;
  manifest["best_epoch"] = art.train_state.best_epoch;
  manifest["best_val_acc"] = art.train_state.best_val_acc;
  manifest["artifacts"] = {
      {"checkpoint",
       {{"path", "checkpoint.gdlt"}, {"sha256", sha256_file_hex(art.checkpoint)}}},
      {"history_csv",
       {{"path", "history.csv"}, {"sha256", sha256_file_hex(art.history_csv)}}},
      {"report_csv",
       {{"path", "report.csv"}, {"sha256", sha256_file_hex(art.report_csv)}}},
  };
  art.manifest_hash = sha256_hex(manifest.dump());
  manifest["manifest_hash"] = art.manifest_hash;
  std::ofstream(art.manifest_json, std::ios::trunc) << manifest.dump(2) << "\n";
  return art;
}

std::vector<EvalReport> run_grid(
    const fs::path& config_dir, bool desk_scale,
    const std::optional<uint64_t>& seed_override,
    const std::optional<fs::path>& output_override) {
  std::vector<fs::path> config_paths;
  for (const auto& entry : fs::directory_iterator(config_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      config_paths.push_back(entry.path());
  std::sort(config_paths.begin(), config_paths.end());
  if (config_paths.empty())
    throw ConfigInvalid("grid", "no *.json configs in " + config_dir.string());

  std::vector<ExperimentConfig> configs;
  for (const auto& path : config_paths) {
    ExperimentConfig cfg = load_experiment_config(path);
    if (seed_override) cfg.train.seed = *seed_override;
    if (output_override) cfg.output_dir = *output_override;
    if (desk_scale) apply_desk_scale(cfg, cfg.output_dir / "desk_scale");
    configs.push_back(std::move(cfg));
  }

  // fresh runs first, then rows that alias an existing run's artifacts
  std::vector<EvalReport> reports(configs.size());
  for (size_t i = 0; i < configs.size(); ++i) {
    if (!configs[i].reuse_of.empty()) continue;
    std::cerr << "[grid] running " << configs[i].name << "\n";
    reports[i] = run_experiment(configs[i]).report;
  }
  for (size_t i = 0; i < configs.size(); ++i) {
    if (configs[i].reuse_of.empty()) continue;
    const auto& cfg = configs[i];
    const fs::path source_csv = cfg.output_dir / cfg.reuse_of / "report.csv";
    if (!fs::exists(source_csv))
      throw ConfigInvalid(
          "reuse_of", "run '" + cfg.reuse_of + "' has no artifacts under " +
                          (cfg.output_dir / cfg.reuse_of).string() +
                          " (run its grid first)");
    EvalReport report = read_report_csv(source_csv);
    report.name = cfg.name;
    report.tag = cfg.tag;
    report.row_label = cfg.row_label;
    report.group_label = cfg.group_label;
    const fs::path run_dir = cfg.output_dir / cfg.name;
    fs::create_directories(run_dir);
    write_report_csv(report, run_dir / "report.csv");
    json manifest = {{"name", cfg.name},
                     {"reuse_of", cfg.reuse_of},
                     {"config", experiment_config_json(cfg)},
                     {"config_hash", config_hash(cfg)}};
    std::ofstream(run_dir / "manifest.json", std::ios::trunc)
        << manifest.dump(2) << "\n";
    reports[i] = std::move(report);
  }
  return reports;
}

}  // namespace gdl
