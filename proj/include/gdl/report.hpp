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

#ifndef GDL_REPORT_HPP_
#define GDL_REPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "gdl/evalmetrics.hpp"

namespace gdl {

/// Output layouts: the three table shapes of the experiment grid plus a
/// grouped-bar-chart figure.
enum class ReportLayout { table1, table2, table3, figure };

bool report_layout_from_string(const std::string& name, ReportLayout* out);

/// Wide one-row CSV: meta columns, per-set AP columns, mAP.
void write_report_csv(const EvalReport& report,
                      const std::filesystem::path& path);
EvalReport read_report_csv(const std::filesystem::path& path);

/// Cell presentation: one decimal; versus a reference value, differences
/// greater than 5 points are bolded and greater than 10 additionally
/// italicized.
std::string format_ap_cell(double value, const double* reference);

struct BarGroup {
  std::string set;
  std::vector<double> values;  // one bar per run, in run order
};

/// Bar layout for the figure: one group per test set of the first run,
/// one bar per run. Throws MissingColumn when a run lacks a set.
std::vector<BarGroup> figure_groups(const std::vector<EvalReport>& runs);

/// Renders the requested layout into out_dir (markdown + CSV for tables,
/// PNG for the figure) and returns the written paths. Table layouts require
/// every canonical test-set column; rows are grouped by row label (tables
/// 1/2, reference rows first) or by group label (table 3, best-per-column
/// bolding within each group).
std::vector<std::filesystem::path> emit_report(
    const std::vector<EvalReport>& runs, ReportLayout layout,
    const std::filesystem::path& out_dir);

}  // namespace gdl

#endif  // GDL_REPORT_HPP_
