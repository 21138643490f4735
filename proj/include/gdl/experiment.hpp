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

#ifndef GDL_EXPERIMENT_HPP_
#define GDL_EXPERIMENT_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gdl/augment.hpp"
#include "gdl/evalmetrics.hpp"
#include "gdl/imgdata.hpp"
#include "gdl/model.hpp"
#include "gdl/train.hpp"

namespace gdl {

/// One experiment row: dataset + subset + policy + detector + schedule +
/// evaluation targets.
struct ExperimentConfig {
  std::string name;
  std::string tag = "reproduced";
  std::string row_label;
  std::string group_label;

  DatasetSpec dataset;
  int class_subset_k = 0;  // 0 = all selected categories
  AugmentationPolicy policy;
  DetectorConfig detector;
  std::optional<std::filesystem::path> weights_dir;
  TrainConfig train;
  int minmax_sample = 10000;

  std::filesystem::path test_root;
  std::vector<std::string> test_sets;
  std::filesystem::path output_dir;

  bool log_augmentations = false;
  std::string reuse_of;  // names another run whose artifacts stand in

  void validate() const;  // throws ConfigInvalid with field paths
};

/// Strict parse: unknown keys and type mismatches raise ConfigInvalid with
/// the dotted field path.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Canonical serialization (all fields, sorted keys); the basis of the
/// config hash.
nlohmann::json experiment_config_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

struct DeskScaleOptions {
  int max_epochs = 8;
  double lr_init = 1e-3;
  int per_class_real = 500;
  int per_class_fake = 500;
  int test_per_class = 150;
  uint64_t corpus_seed = 20260811;
};

/// Swaps the configured corpus for the generated synthetic one (created under
/// `workspace` on first use), substitutes the small from-scratch backbone,
/// and caps the epoch budget.
void apply_desk_scale(ExperimentConfig& cfg,
                      const std::filesystem::path& workspace,
                      const DeskScaleOptions& opts = {});

struct RunArtifacts {
  std::filesystem::path run_dir;
  std::filesystem::path checkpoint;
  std::filesystem::path history_csv;
  std::filesystem::path report_csv;
  std::filesystem::path report_md;
  std::filesystem::path manifest_json;
  std::string manifest_hash;
  EvalReport report;
  TrainState train_state;
};

/// scan -> subset -> split -> build -> (fit scaler) -> train -> evaluate ->
/// persist. Deterministic for a fixed config+seed, so re-running reproduces
/// the manifest hash.
RunArtifacts run_experiment(const ExperimentConfig& cfg);

/// Runs every *.json config in the directory (sorted), handling reuse rows
/// by copying the referenced run's report. Returns the emitted reports in
/// config order.
std::vector<EvalReport> run_grid(const std::filesystem::path& config_dir,
                                 bool desk_scale,
                                 const std::optional<uint64_t>& seed_override,
                                 const std::optional<std::filesystem::path>&
                                     output_override);

}  // namespace gdl

#endif  // GDL_EXPERIMENT_HPP_
