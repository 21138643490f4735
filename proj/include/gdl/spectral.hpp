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

#ifndef GDL_SPECTRAL_HPP_
#define GDL_SPECTRAL_HPP_

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include "gdl/tensor.hpp"

namespace gdl {

/// Orthonormal type-II DCT basis matrix of size n.
/// Row k, column m: s_k * cos(pi * (2m+1) * k / (2n)), with s_0 = sqrt(1/n)
/// and s_k = sqrt(2/n) otherwise. Cached per size.
const Eigen::MatrixXd& dct_matrix(int n);

/// Separable orthonormal 2-D DCT-II along both axes. Energy-preserving
/// (Parseval), inverse given by idct2d.
Eigen::MatrixXd dct2d(const Eigen::MatrixXd& block);

/// Inverse of dct2d.
Eigen::MatrixXd idct2d(const Eigen::MatrixXd& spectrum);

/// Applies dct2d to each channel of a CHW float tensor (computed in double,
/// stored back as float32).
Tensor dct2d_channels(const Tensor& chw);

/// Per-coefficient min/max statistics that rescale spectra into [0,1].
/// Fit over a sample of training spectra, then persisted next to the model
/// checkpoint.
class MinMaxScaler {
 public:
  /// Folds one spectrum into the running elementwise min/max.
  void update(const Tensor& spectrum);

  /// Seals the statistics: degenerate coefficients (max == min) get max
  /// raised by epsilon so apply() never divides by zero.
  void finalize();

  bool fitted() const { return fitted_; }
  const Tensor& per_coefficient_min() const { return min_; }
  const Tensor& per_coefficient_max() const { return max_; }

  /// (x - min) / (max - min), clamped to [0,1]; test-time spectra may fall
  /// outside the fitted range.
  Tensor apply(const Tensor& spectrum) const;

  void save(const std::filesystem::path& path) const;
  static MinMaxScaler load(const std::filesystem::path& path);

  static constexpr double kEpsilon = 1e-8;

 private:
  Tensor min_, max_;
  bool any_ = false;
  bool fitted_ = false;
};

/// One-shot fit over a sample. Throws EmptySample when the sample is empty.
MinMaxScaler fit_minmax(const std::vector<Tensor>& sample);

}  // namespace gdl

#endif  // GDL_SPECTRAL_HPP_
