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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "gdl/errors.hpp"
#include "gdl/report.hpp"
#include "testutil.hpp"

using namespace gdl;

namespace {

EvalReport make_report(const std::string& name, const std::string& tag,
                       const std::string& row_label, double base,
                       const std::string& group = "") {
  EvalReport report;
  report.name = name;
  report.tag = tag;
  report.row_label = row_label;
  report.group_label = group;
  report.seed = 7;
  report.config_hash = "cafe";
  report.checkpoint_id = "beef";
  double sum = 0.0;
  double v = base;
  for (const auto& set : canonical_test_sets()) {
    report.per_set_ap.emplace_back(set, v);
    sum += v;
    v = v >= 99.0 ? base : v + 1.0;
  }
  report.map_percent = sum / double(report.per_set_ap.size());
  return report;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream is(path);
  return std::string(std::istreambuf_iterator<char>(is),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("report csv round trip") {
  testutil::TempDir tmp("repcsv");
  const EvalReport report = make_report("runA", "reproduced", "Blur", 81.25);
  const auto path = tmp.path() / "report.csv";
  write_report_csv(report, path);
  const EvalReport loaded = read_report_csv(path);
  CHECK(loaded.name == report.name);
  CHECK(loaded.tag == report.tag);
  CHECK(loaded.row_label == report.row_label);
  CHECK(loaded.seed == report.seed);
  CHECK(loaded.config_hash == report.config_hash);
  REQUIRE(loaded.per_set_ap.size() == report.per_set_ap.size());
  for (size_t i = 0; i < loaded.per_set_ap.size(); ++i) {
    CHECK(loaded.per_set_ap[i].first == report.per_set_ap[i].first);
    CHECK(loaded.per_set_ap[i].second ==
          doctest::Approx(report.per_set_ap[i].second).epsilon(1e-12));
  }
  CHECK(loaded.map_percent ==
        doctest::Approx(report.map_percent).epsilon(1e-12));
}

TEST_CASE("cell formatting thresholds") {
  const double ref_small = 90.0;
  CHECK(format_ap_cell(92.0, &ref_small) == "92.0");
  CHECK(format_ap_cell(96.1, &ref_small) == "**96.1**");   // gap > 5
  CHECK(format_ap_cell(79.0, &ref_small) == "***79.0***"); // gap > 10
  CHECK(format_ap_cell(92.0, nullptr) == "92.0");
  CHECK(format_ap_cell(95.0, &ref_small) == "95.0");  // exactly 5 is plain
}

TEST_CASE("table: reference deltas get bolded") {
  testutil::TempDir tmp("table");
  EvalReport reference = make_report("orig", "reference", "Blur", 90.0);
  EvalReport reproduced = make_report("ours", "reproduced", "Blur", 90.0);
  // force one 6-point gap
  reproduced.per_set_ap[2].second = reference.per_set_ap[2].second + 6.0;

  const auto files =
      emit_report({reproduced, reference}, ReportLayout::table1, tmp.path());
  REQUIRE(files.size() == 2);
  const std::string md = slurp(files[0]);
  char want[64];
  std::snprintf(want, sizeof(want), "**%.1f**",
                reproduced.per_set_ap[2].second);
  CHECK(md.find(want) != std::string::npos);
  // reference row comes first within the group
  CHECK(md.find("reference") < md.find("reproduced"));
}

TEST_CASE("table: single run keeps mAP consistent with its AP columns") {
  testutil::TempDir tmp("table1run");
  const EvalReport run = make_report("solo", "reproduced", "No Aug.", 85.0);
  const auto files = emit_report({run}, ReportLayout::table2, tmp.path());
  const std::string csv = slurp(files[1]);
  // last cell of the data row is the rounded mAP
  char want[32];
  std::snprintf(want, sizeof(want), ",%.1f\n", run.map_percent);
  CHECK(csv.find(want) != std::string::npos);
}

TEST_CASE("table3 bolds the best result per column within a classifier") {
  testutil::TempDir tmp("table3");
  EvalReport a =
      make_report("r_noaug", "reproduced", "No Aug.", 80.2, "ResNet50");
  EvalReport b = make_report("r_blur", "reproduced", "Blur", 70.4, "ResNet50");
  a.per_set_ap[0].second = 99.3;
  b.per_set_ap[0].second = 88.7;
  const auto files = emit_report({a, b}, ReportLayout::table3, tmp.path());
  const std::string md = slurp(files[0]);
  CHECK(md.find("**99.3**") != std::string::npos);   // column max, bolded
  CHECK(md.find("**88.7**") == std::string::npos);   // dominated, plain
  CHECK(md.find("88.7") != std::string::npos);
}

TEST_CASE("missing canonical column raises MissingColumn") {
  testutil::TempDir tmp("missing");
  EvalReport bad;
  bad.name = "desk";
  bad.per_set_ap = {{"held_out", 99.0}};
  bad.map_percent = 99.0;
  CHECK_THROWS_AS(emit_report({bad}, ReportLayout::table1, tmp.path()),
                  MissingColumn);
}

TEST_CASE("figure layout: one group per test set, one bar per run") {
  testutil::TempDir tmp("figure");
  std::vector<EvalReport> runs;
  for (int i = 0; i < 5; ++i)
    runs.push_back(make_report("run" + std::to_string(i), "reproduced",
                               std::to_string(2 << i) + "-class",
                               70.0 + 5.0 * i));
  const auto groups = figure_groups(runs);
  REQUIRE(groups.size() == canonical_test_sets().size());
  for (const auto& group : groups) REQUIRE(group.values.size() == 5);

  const auto files = emit_report(runs, ReportLayout::figure, tmp.path());
  REQUIRE(files.size() == 1);
  CHECK(std::filesystem::file_size(files[0]) > 1000);
}

TEST_CASE("figure over non-canonical sets works for desk-scale runs") {
  EvalReport desk;
  desk.name = "desk";
  desk.row_label = "tiny";
  desk.per_set_ap = {{"held_out", 97.0}};
  desk.map_percent = 97.0;
  const auto groups = figure_groups({desk});
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].set == "held_out");

  EvalReport other = desk;
  other.per_set_ap = {{"different", 90.0}};
  CHECK_THROWS_AS(figure_groups({desk, other}), MissingColumn);
}
