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

#include "gdl/evalmetrics.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

#include "gdl/augment.hpp"
#include "gdl/errors.hpp"
#include "gdl/imgdata.hpp"
#include "gdl/imgio.hpp"

namespace fs = std::filesystem;

namespace gdl {

Tensor SpatialPreprocessor::operator()(const Image& crop) const {
  return standardize(crop);
}

Tensor SpectralPreprocessor::operator()(const Image& crop) const {
  return scaler_->apply(dct2d_channels(to_unit_tensor(crop)));
}

double average_precision(std::span<const double> scores,
                         std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw ShapeMismatch("average_precision: scores/labels size mismatch");
  int64_t positives = 0;
  for (int l : labels) positives += l;
  const int64_t negatives = static_cast<int64_t>(labels.size()) - positives;
  if (positives == 0 || negatives == 0)
    throw DegenerateLabels(
        "average_precision: need at least one positive and one negative");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;  // stable among ties; ties are grouped below anyway
  });

  // walk distinct-score groups; precision/recall are evaluated only at group
  // boundaries so equal scores share a single operating point
  double ap = 0.0;
  double prev_recall = 0.0;
  int64_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += labels[order[j]];
      fp += 1 - labels[order[j]];
      ++j;
    }
    const double recall = static_cast<double>(tp) / positives;
    const double precision = static_cast<double>(tp) / (tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

double mean_ap(const std::map<std::string, double>& per_set_ap) {
  if (per_set_ap.empty()) throw EmptyReport("mean_ap: empty report");
  double sum = 0.0;
  for (const auto& [_, v] : per_set_ap) sum += v;
  return sum / static_cast<double>(per_set_ap.size());
}

const double* EvalReport::find_ap(const std::string& set_name) const {
  for (const auto& [name, v] : per_set_ap)
    if (name == set_name) return &v;
  return nullptr;
}

namespace {

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

EvalReport evaluate_testsets(const ScoringModel& model,
                             const EvalPreprocessor& preprocess,
                             const std::filesystem::path& test_root,
                             const std::vector<std::string>& sets,
                             const EvalOptions& opts) {
  EvalReport report;
  std::map<std::string, double> ap_values;

  for (const std::string& set_name : sets) {
    const fs::path set_dir = test_root / set_name;
    if (!fs::is_directory(set_dir / "0_real") ||
        !fs::is_directory(set_dir / "1_fake"))
      throw MissingSet(set_name);

    std::vector<std::pair<fs::path, int>> items;
    for (const auto& p : list_images(set_dir / "0_real")) items.emplace_back(p, 0);
    for (const auto& p : list_images(set_dir / "1_fake")) items.emplace_back(p, 1);

    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(items.size());
    labels.reserve(items.size());

    std::vector<Tensor> batch_inputs;
    std::vector<int> batch_labels;
    auto flush = [&]() {
      if (batch_inputs.empty()) return;
      const int64_t n = static_cast<int64_t>(batch_inputs.size());
      const auto& s = batch_inputs.front().shape();
      Tensor batch({n, s[0], s[1], s[2]});
      const int64_t item = batch_inputs.front().numel();
      for (int64_t b = 0; b < n; ++b)
        std::copy_n(batch_inputs[size_t(b)].data(), item,
                    batch.data() + b * item);
      const std::vector<float> out = model.score(batch);
      for (int64_t b = 0; b < n; ++b) {
        scores.push_back(static_cast<double>(out[size_t(b)]));
        labels.push_back(batch_labels[size_t(b)]);
      }
      batch_inputs.clear();
      batch_labels.clear();
    };

    for (const auto& [path, label] : items) {
      Image img;
      try {
        img = decode_image_file(path);
      } catch (const DecodeError&) {
        std::cerr << "warning: undecodable test image skipped: " << path
                  << "\n";
        continue;
      }
      if (img.h < opts.crop_size || img.w < opts.crop_size) {
        ++report.skipped_too_small;
        std::cerr << "warning: test image smaller than crop, skipped: " << path
                  << "\n";
        continue;
      }
      batch_inputs.push_back(preprocess(center_crop(img, opts.crop_size)));
      batch_labels.push_back(label);
      if (static_cast<int>(batch_inputs.size()) >= opts.batch_size) flush();
    }
    flush();

    const double ap = average_precision(scores, labels);
    ap_values[set_name] = ap;
    report.per_set_ap.emplace_back(set_name, 100.0 * ap);
  }

  report.map_percent = 100.0 * mean_ap(ap_values);
  return report;
}

const std::vector<std::string>& canonical_test_sets() {
  static const std::vector<std::string> kSets = {
      "ProGAN", "StyleGAN", "BigGAN", "CycleGAN", "StarGAN", "GauGAN",
      "CRN",    "IMLE",     "SITD",   "SAN",      "DeepFake"};
  return kSets;
}

}  // namespace gdl
