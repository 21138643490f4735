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

#ifndef GDL_EVALMETRICS_HPP_
#define GDL_EVALMETRICS_HPP_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gdl/image.hpp"
#include "gdl/spectral.hpp"
#include "gdl/tensor.hpp"

namespace gdl {

/// Anything that maps a batch of model inputs (N x 3 x 224 x 224) to one
/// real-valued score per item. Higher score = more likely generated.
class ScoringModel {
 public:
  virtual ~ScoringModel() = default;
  virtual std::vector<float> score(const Tensor& batch) const = 0;
};

/// Maps a 224x224 crop to the tensor a detector consumes.
class EvalPreprocessor {
 public:
  virtual ~EvalPreprocessor() = default;
  virtual Tensor operator()(const Image& crop) const = 0;
};

/// [0,1] scaling + per-channel standardization (spatial backbones).
class SpatialPreprocessor : public EvalPreprocessor {
 public:
  Tensor operator()(const Image& crop) const override;
};

/// [0,1] scaling + per-channel DCT-II + fitted MinMax (spectral path).
class SpectralPreprocessor : public EvalPreprocessor {
 public:
  explicit SpectralPreprocessor(const MinMaxScaler* scaler) : scaler_(scaler) {}
  Tensor operator()(const Image& crop) const override;

 private:
  const MinMaxScaler* scaler_;
};

struct ScoredSet {
  std::string name;
  std::vector<double> scores;
  std::vector<int> labels;  // 0/1
};

/// Step-interpolated Average Precision with ties grouped at a single
/// threshold: sort by score descending, AP = sum over distinct-score
/// boundaries of (R_k - R_{k-1}) * P_k. Permutation-invariant and insensitive
/// to strictly increasing score transforms. Throws DegenerateLabels when the
/// labels are all-positive or all-negative.
double average_precision(std::span<const double> scores,
                         std::span<const int> labels);

/// Unweighted arithmetic mean. Throws EmptyReport on an empty map.
double mean_ap(const std::map<std::string, double>& per_set_ap);

struct EvalReport {
  std::string name;         // run identity
  std::string tag;          // result tag, e.g. "reproduced" / "reference"
  std::string row_label;    // table row label, e.g. "Blur + JPEG (0.5)"
  std::string group_label;  // classifier grouping for the comparison table
  // percent AP per test set, in evaluation order; full precision internally,
  // rounded only at the presentation layer
  std::vector<std::pair<std::string, double>> per_set_ap;
  double map_percent = 0.0;
  std::string config_hash;
  std::string checkpoint_id;
  uint64_t seed = 0;
  int skipped_too_small = 0;

  const double* find_ap(const std::string& set_name) const;
};

struct EvalOptions {
  int batch_size = 32;
  int crop_size = 224;
};

/// Scores every image of every named test set (layout:
/// <test_root>/<set>/{0_real,1_fake}/*) after a center crop with no resizing
/// and no augmentation, then computes per-set AP and their mean. Images
/// smaller than the crop are skipped with a warning. Results are independent
/// of file enumeration and batching order.
EvalReport evaluate_testsets(const ScoringModel& model,
                             const EvalPreprocessor& preprocess,
                             const std::filesystem::path& test_root,
                             const std::vector<std::string>& sets,
                             const EvalOptions& opts = {});

/// Paper-order test-set columns used by the report layouts.
const std::vector<std::string>& canonical_test_sets();

}  // namespace gdl

#endif  // GDL_EVALMETRICS_HPP_
