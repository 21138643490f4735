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

#include "gdl/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "gdl/errors.hpp"

namespace fs = std::filesystem;

namespace gdl {

namespace {

std::string round1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cols;
  size_t start = 0;
  for (size_t pos = 0; (pos = line.find(',', start)) != std::string::npos;
       start = pos + 1)
    cols.push_back(line.substr(start, pos - start));
  cols.push_back(line.substr(start));
  return cols;
}

// rows grouped for presentation: tables 1/2 group by row label with
// reference-tagged runs leading, table 3 groups by classifier label
std::vector<std::vector<const EvalReport*>> group_rows(
    const std::vector<EvalReport>& runs, bool by_group_label) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const EvalReport*>> groups;
  for (const auto& run : runs) {
    const std::string key = by_group_label ? run.group_label : run.row_label;
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&run);
  }
  std::vector<std::vector<const EvalReport*>> out;
  for (const auto& key : order) {
    auto& rows = groups[key];
    std::stable_sort(rows.begin(), rows.end(),
                     [](const EvalReport* a, const EvalReport* b) {
                       return (a->tag == "reference") > (b->tag == "reference");
                     });
    out.push_back(rows);
  }
  return out;
}

void require_columns(const std::vector<EvalReport>& runs,
                     const std::vector<std::string>& columns) {
  for (const auto& run : runs)
    for (const auto& col : columns)
      if (!run.find_ap(col))
        throw MissingColumn("run '" + run.name + "' lacks column '" + col +
                            "'");
}

}  // namespace

bool report_layout_from_string(const std::string& name, ReportLayout* out) {
  if (name == "table1") *out = ReportLayout::table1;
  else if (name == "table2") *out = ReportLayout::table2;
  else if (name == "table3") *out = ReportLayout::table3;
  else if (name == "figure") *out = ReportLayout::figure;
  else return false;
  return true;
}

void write_report_csv(const EvalReport& report, const fs::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot write report: " + path.string());
  os << "name,tag,row_label,group_label,seed,config_hash,checkpoint_id";
  for (const auto& [set, _] : report.per_set_ap) os << ',' << set;
  os << ",mAP\n";
  os << report.name << ',' << report.tag << ',' << report.row_label << ','
     << report.group_label << ',' << report.seed << ',' << report.config_hash
     << ',' << report.checkpoint_id;
  os.precision(17);
  for (const auto& [_, ap] : report.per_set_ap) os << ',' << ap;
  os << ',' << report.map_percent << '\n';
}

EvalReport read_report_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read report: " + path.string());
  std::string header, row;
  if (!std::getline(is, header) || !std::getline(is, row))
    throw Error("malformed report csv: " + path.string());
  const auto cols = split_csv_line(header);
  const auto vals = split_csv_line(row);
  if (cols.size() != vals.size() || cols.size() < 8)
    throw Error("malformed report csv: " + path.string());
  EvalReport report;
  report.name = vals[0];
  report.tag = vals[1];
  report.row_label = vals[2];
  report.group_label = vals[3];
  report.seed = std::stoull(vals[4]);
  report.config_hash = vals[5];
  report.checkpoint_id = vals[6];
  for (size_t i = 7; i + 1 < cols.size(); ++i)
    report.per_set_ap.emplace_back(cols[i], std::stod(vals[i]));
  report.map_percent = std::stod(vals.back());
  return report;
}

std::string format_ap_cell(double value, const double* reference) {
  std::string text = round1(value);
  if (!reference) return text;
  const double delta = std::abs(value - *reference);
  if (delta > 10.0) return "***" + text + "***";
  if (delta > 5.0) return "**" + text + "**";
  return text;
}

std::vector<BarGroup> figure_groups(const std::vector<EvalReport>& runs) {
  if (runs.empty()) throw EmptyReport("figure_groups: no runs");
  std::vector<BarGroup> groups;
  for (const auto& [set, _] : runs.front().per_set_ap) {
    BarGroup group{set, {}};
    for (const auto& run : runs) {
      const double* ap = run.find_ap(set);
      if (!ap)
        throw MissingColumn("run '" + run.name + "' lacks column '" + set +
                            "'");
      group.values.push_back(*ap);
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

namespace {

std::vector<fs::path> emit_table(const std::vector<EvalReport>& runs,
                                 ReportLayout layout, const fs::path& out_dir) {
  const std::vector<std::string>& columns = canonical_test_sets();
  require_columns(runs, columns);
  const bool per_classifier = layout == ReportLayout::table3;
  const auto groups = group_rows(runs, per_classifier);

  const char* stem = layout == ReportLayout::table1   ? "table1"
                     : layout == ReportLayout::table2 ? "table2"
                                                      : "table3";
  std::ostringstream md, csv;

  md << (per_classifier ? "| Classifier | Augmentation |" : "| Name | Result |");
  for (const auto& col : columns) md << ' ' << col << " |";
  md << " mAP |\n|";
  for (size_t i = 0; i < columns.size() + 3; ++i) md << "---|";
  md << '\n';

  csv << (per_classifier ? "classifier,augmentation" : "name,result");
  for (const auto& col : columns) csv << ',' << col;
  csv << ",mAP\n";

  for (const auto& rows : groups) {
    // reference row for delta annotations (tables 1/2); per-column maxima
    // within a classifier group (table 3)
    const EvalReport* reference = nullptr;
    std::map<std::string, double> best;
    if (per_classifier) {
      for (const auto* run : rows) {
        for (const auto& col : columns) {
          const double v = *run->find_ap(col);
          auto it = best.find(col);
          if (it == best.end() || v > it->second) best[col] = v;
        }
        auto it = best.find("mAP");
        if (it == best.end() || run->map_percent > it->second)
          best["mAP"] = run->map_percent;
      }
    } else {
      for (const auto* run : rows)
        if (run->tag == "reference") {
          reference = run;
          break;
        }
    }

    bool first = true;
    for (const auto* run : rows) {
      const std::string left =
          per_classifier ? (first ? run->group_label : "")
                         : (first ? run->row_label : "");
      const std::string right = per_classifier ? run->row_label : run->tag;
      md << "| " << left << " | " << right << " |";
      csv << (per_classifier ? run->group_label : run->row_label) << ','
          << right;
      for (const auto& col : columns) {
        const double v = *run->find_ap(col);
        std::string cell;
        if (per_classifier) {
          cell = round1(v);
          if (v >= best[col]) cell = "**" + cell + "**";
        } else {
          const double* ref =
              (reference && run != reference) ? reference->find_ap(col)
                                              : nullptr;
          cell = format_ap_cell(v, ref);
        }
        md << ' ' << cell << " |";
        csv << ',' << round1(v);
      }
      std::string map_cell;
      if (per_classifier) {
        map_cell = round1(run->map_percent);
        if (run->map_percent >= best["mAP"]) map_cell = "**" + map_cell + "**";
      } else {
        const double* ref =
            (reference && run != reference) ? &reference->map_percent : nullptr;
        map_cell = format_ap_cell(run->map_percent, ref);
      }
      md << ' ' << map_cell << " |\n";
      csv << ',' << round1(run->map_percent) << '\n';
      first = false;
    }
  }
  md << "\nDifferences versus the reference row greater than 5 points are "
        "bold, greater than 10 points additionally italic.\n";

  fs::create_directories(out_dir);
  const fs::path md_path = out_dir / (std::string(stem) + ".md");
  const fs::path csv_path = out_dir / (std::string(stem) + ".csv");
  std::ofstream(md_path, std::ios::trunc) << md.str();
  std::ofstream(csv_path, std::ios::trunc) << csv.str();
  return {md_path, csv_path};
}

std::vector<fs::path> emit_figure(const std::vector<EvalReport>& runs,
                                  const fs::path& out_dir) {
  const auto groups = figure_groups(runs);
  const int n_runs = static_cast<int>(runs.size());
  const int bar_w = 14, bar_gap = 2, group_gap = 26;
  const int margin_left = 70, margin_right = 30, margin_top = 40,
            margin_bottom = 90;
  const int plot_h = 320;
  const int group_w = n_runs * (bar_w + bar_gap) + group_gap;
  const int width =
      margin_left + margin_right + static_cast<int>(groups.size()) * group_w;
  const int height = margin_top + plot_h + margin_bottom +
                     26 * ((n_runs + 2) / 3);  // legend rows

  cv::Mat canvas(height, width, CV_8UC3, cv::Scalar(255, 255, 255));
  const std::vector<cv::Scalar> palette = {
      {180, 119, 31}, {14, 127, 255},  {44, 160, 44},  {40, 39, 214},
      {189, 103, 148}, {75, 86, 140},  {194, 119, 227}, {127, 127, 127}};

  // axis + horizontal grid every 25 AP points
  const int x0 = margin_left, y0 = margin_top + plot_h;
  cv::line(canvas, {x0, margin_top}, {x0, y0}, {0, 0, 0}, 1);
  cv::line(canvas, {x0, y0}, {width - margin_right, y0}, {0, 0, 0}, 1);
  for (int tick = 0; tick <= 100; tick += 25) {
    const int y = y0 - tick * plot_h / 100;
    cv::line(canvas, {x0 - 4, y}, {width - margin_right, y},
             {220, 220, 220}, 1);
    cv::putText(canvas, std::to_string(tick), {x0 - 44, y + 5},
                cv::FONT_HERSHEY_SIMPLEX, 0.45, {0, 0, 0}, 1, cv::LINE_AA);
  }

  int gx = x0 + group_gap / 2;
  for (const auto& group : groups) {
    for (int r = 0; r < n_runs; ++r) {
      const int h = static_cast<int>(group.values[size_t(r)] * plot_h / 100.0);
      const cv::Rect bar(gx + r * (bar_w + bar_gap), y0 - h, bar_w, h);
      cv::rectangle(canvas, bar, palette[size_t(r) % palette.size()],
                    cv::FILLED);
    }
    cv::putText(canvas, group.set,
                {gx, y0 + 18 + (gx / group_w % 2) * 14},
                cv::FONT_HERSHEY_SIMPLEX, 0.42, {0, 0, 0}, 1, cv::LINE_AA);
    gx += group_w;
  }

  int ly = margin_top + plot_h + 52;
  int lx = margin_left;
  for (int r = 0; r < n_runs; ++r) {
    cv::rectangle(canvas, cv::Rect(lx, ly - 10, 14, 12),
                  palette[size_t(r) % palette.size()], cv::FILLED);
    const std::string label =
        runs[size_t(r)].row_label.empty() ? runs[size_t(r)].name
                                          : runs[size_t(r)].row_label;
    cv::putText(canvas, label, {lx + 20, ly}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
                {0, 0, 0}, 1, cv::LINE_AA);
    lx += 220;
    if (lx + 200 > width) {
      lx = margin_left;
      ly += 26;
    }
  }

  fs::create_directories(out_dir);
  const fs::path png_path = out_dir / "figure.png";
  if (!cv::imwrite(png_path.string(), canvas))
    throw Error("cannot write figure: " + png_path.string());
  return {png_path};
}

}  // namespace

std::vector<fs::path> emit_report(const std::vector<EvalReport>& runs,
                                  ReportLayout layout,
                                  const fs::path& out_dir) {
  if (runs.empty()) throw EmptyReport("emit_report: no runs");
  if (layout == ReportLayout::figure) return emit_figure(runs, out_dir);
  return emit_table(runs, layout, out_dir);
}

}  // namespace gdl
