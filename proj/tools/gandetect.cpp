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

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>

#include "gdl/errors.hpp"
#include "gdl/experiment.hpp"
#include "gdl/report.hpp"
#include "gdl/synth.hpp"

namespace fs = std::filesystem;

namespace {

gdl::ExperimentConfig load_config(const std::string& config_path,
                                  std::optional<uint64_t> seed,
                                  std::optional<std::string> out,
                                  bool desk_scale) {
  gdl::ExperimentConfig cfg = gdl::load_experiment_config(config_path);
  if (seed) cfg.train.seed = *seed;
  if (out) cfg.output_dir = *out;
  if (desk_scale) gdl::apply_desk_scale(cfg, cfg.output_dir / "desk_scale");
  return cfg;
}

void print_report(const gdl::EvalReport& report) {
  std::cout << report.name << " [" << report.tag << "]\n";
  char buf[64];
  for (const auto& [set, ap] : report.per_set_ap) {
    std::snprintf(buf, sizeof(buf), "  %-12s AP %6.1f\n", set.c_str(), ap);
    std::cout << buf;
  }
  std::snprintf(buf, sizeof(buf), "  %-12s    %6.1f\n", "mAP",
                report.map_percent);
  std::cout << buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "gan-detect-lab: train and evaluate real-vs-generated image detectors"};
  app.require_subcommand(1);

  std::string config_path, out_dir, layout_name = "table1", checkpoint_path;
  std::string manifest_out;
  std::vector<std::string> run_csvs;
  std::optional<uint64_t> seed;
  std::optional<std::string> out_override;
  bool desk_scale = false;
  uint64_t synth_seed = 20260811;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", config_path, "experiment config JSON");
    if (needs_config) opt->required();
    cmd->add_option("--seed", seed, "override the training seed");
    cmd->add_option("--out", out_override, "override the output directory");
    cmd->add_flag("--desk-scale", desk_scale,
                  "substitute the synthetic toy corpus and capped epochs");
  };

  auto* scan = app.add_subcommand(
      "scan", "scan the dataset and write a manifest CSV");
  add_common(scan, true);
  scan->add_option("--manifest", manifest_out, "manifest CSV path");

  auto* train = app.add_subcommand(
      "train", "run one experiment end to end (train + evaluate + persist)");
  add_common(train, true);

  auto* eval = app.add_subcommand(
      "eval", "evaluate an existing checkpoint on the configured test sets");
  add_common(eval, true);
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")
      ->required();

  auto* report = app.add_subcommand(
      "report", "render tables/figures from run report CSVs");
  report->add_option("--layout", layout_name, "table1|table2|table3|figure");
  report->add_option("--out", out_dir, "output directory")->required();
  report->add_option("runs", run_csvs, "report.csv files, row order")
      ->required();

  auto* grid = app.add_subcommand(
      "grid", "run every config in a directory (a paper-grid table)");
  grid->add_option("--dir", config_path, "config directory")->required();
  grid->add_option("--seed", seed, "override the training seed");
  grid->add_option("--out", out_override, "override the output directory");
  grid->add_flag("--desk-scale", desk_scale,
                 "substitute the synthetic toy corpus and capped epochs");

  auto* synth = app.add_subcommand(
      "synth", "generate the synthetic desk-scale corpus");
  synth->add_option("--out", out_dir, "corpus root")->required();
  synth->add_option("--seed", synth_seed, "corpus seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*scan) {
      gdl::ExperimentConfig cfg =
          load_config(config_path, seed, out_override, desk_scale);
      gdl::ScanWarnings warnings;
      auto records = gdl::scan_dataset(cfg.dataset, &warnings);
      std::cout << "scanned " << records.size() << " records ("
                << warnings.undecodable.size() << " skipped)\n";
      if (!manifest_out.empty()) {
        gdl::write_manifest_csv(records, cfg.dataset.root, manifest_out);
        std::cout << "manifest written to " << manifest_out << "\n";
      }
    } else if (*train) {
      gdl::ExperimentConfig cfg =
          load_config(config_path, seed, out_override, desk_scale);
      gdl::RunArtifacts art = gdl::run_experiment(cfg);
      print_report(art.report);
      std::cout << "artifacts in " << art.run_dir << "\nmanifest hash "
                << art.manifest_hash << "\n";
    } else if (*eval) {
      gdl::ExperimentConfig cfg =
          load_config(config_path, seed, out_override, desk_scale);
      gdl::Detector detector = gdl::Detector::load_checkpoint(checkpoint_path);
      std::unique_ptr<gdl::EvalPreprocessor> preproc;
      std::optional<gdl::MinMaxScaler> scaler;
      if (detector.config().input_domain == gdl::InputDomain::spectral) {
        scaler = gdl::MinMaxScaler::load(
            fs::path(checkpoint_path).parent_path() / "scaler.gdlt");
        preproc = std::make_unique<gdl::SpectralPreprocessor>(&*scaler);
      } else {
        preproc = std::make_unique<gdl::SpatialPreprocessor>();
      }
      gdl::EvalReport rep = gdl::evaluate_testsets(
          detector, *preproc, cfg.test_root, cfg.test_sets,
          gdl::EvalOptions{cfg.train.batch_size, gdl::kCropSize});
      rep.name = cfg.name;
      rep.tag = cfg.tag;
      print_report(rep);
      if (out_override) {
        fs::create_directories(*out_override);
        gdl::write_report_csv(rep, fs::path(*out_override) / "report.csv");
      }
    } else if (*report) {
      gdl::ReportLayout layout;
      if (!gdl::report_layout_from_string(layout_name, &layout))
        throw gdl::ConfigInvalid("layout", "unknown layout " + layout_name);
      std::vector<gdl::EvalReport> reports;
      for (const auto& csv : run_csvs)
        reports.push_back(gdl::read_report_csv(csv));
      for (const auto& path : gdl::emit_report(reports, layout, out_dir))
        std::cout << "wrote " << path << "\n";
    } else if (*grid) {
      auto reports = gdl::run_grid(
          config_path, desk_scale, seed,
          out_override ? std::optional<fs::path>(*out_override) : std::nullopt);
      for (const auto& rep : reports) print_report(rep);
    } else if (*synth) {
      gdl::SynthSpec spec;
      gdl::generate_training_corpus(fs::path(out_dir) / "train", spec,
                                    synth_seed);
      gdl::SynthSpec test_spec = spec;
      test_spec.per_class_real = 150;
      test_spec.per_class_fake = 150;
      gdl::generate_test_set(fs::path(out_dir) / "test" / "held_out",
                             test_spec, 150, 150, synth_seed + 1);
      std::cout << "synthetic corpus written under " << out_dir << "\n";
    }
  } catch (const gdl::ConfigInvalid& e) {
    std::cerr << "config error [" << e.field() << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
