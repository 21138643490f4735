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

#include "gdl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "gdl/checkpoint.hpp"
#include "gdl/errors.hpp"

namespace gdl {

const Eigen::MatrixXd& dct_matrix(int n) {
  static std::mutex mu;
  static std::map<int, Eigen::MatrixXd> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  Eigen::MatrixXd c(n, n);
  const double s0 = std::sqrt(1.0 / n);
  const double sk = std::sqrt(2.0 / n);
  for (int k = 0; k < n; ++k) {
    const double scale = (k == 0) ? s0 : sk;
    for (int m = 0; m < n; ++m) {
      c(k, m) =
          scale * std::cos(std::numbers::pi * (2.0 * m + 1.0) * k / (2.0 * n));
    }
  }
  return cache.emplace(n, std::move(c)).first->second;
}

Eigen::MatrixXd dct2d(const Eigen::MatrixXd& block) {
  const auto& ch = dct_matrix(static_cast<int>(block.rows()));
  const auto& cw = dct_matrix(static_cast<int>(block.cols()));
  return ch * block * cw.transpose();
}

Eigen::MatrixXd idct2d(const Eigen::MatrixXd& spectrum) {
  const auto& ch = dct_matrix(static_cast<int>(spectrum.rows()));
  const auto& cw = dct_matrix(static_cast<int>(spectrum.cols()));
  return ch.transpose() * spectrum * cw;
}

Tensor dct2d_channels(const Tensor& chw) {
  if (chw.ndim() != 3) throw ShapeMismatch("dct2d_channels: expected CHW tensor");
  const int64_t channels = chw.dim(0);
  const int64_t h = chw.dim(1);
  const int64_t w = chw.dim(2);
  Tensor out(chw.shape());
  Eigen::MatrixXd block(h, w);
  for (int64_t c = 0; c < channels; ++c) {
    const float* src = chw.data() + c * h * w;
    for (int64_t y = 0; y < h; ++y)
      for (int64_t x = 0; x < w; ++x)
        block(y, x) = static_cast<double>(src[y * w + x]);
    Eigen::MatrixXd spec = dct2d(block);
    float* dst = out.data() + c * h * w;
    for (int64_t y = 0; y < h; ++y)
      for (int64_t x = 0; x < w; ++x)
        dst[y * w + x] = static_cast<float>(spec(y, x));
  }
  return out;
}

void MinMaxScaler::update(const Tensor& spectrum) {
  if (fitted_) throw NotFitted("MinMaxScaler: update() after finalize()");
  if (!any_) {
    min_ = spectrum;
    max_ = spectrum;
    any_ = true;
    return;
  }
  if (!spectrum.same_shape(min_))
    throw ShapeMismatch("MinMaxScaler: sample shape changed mid-fit");
  const float* s = spectrum.data();
  float* lo = min_.data();
  float* hi = max_.data();
  const int64_t n = spectrum.numel();
  for (int64_t i = 0; i < n; ++i) {
    lo[i] = std::min(lo[i], s[i]);
    hi[i] = std::max(hi[i], s[i]);
  }
}

void MinMaxScaler::finalize() {
  if (!any_) throw EmptySample("MinMaxScaler: no spectra supplied");
  float* lo = min_.data();
  float* hi = max_.data();
  const int64_t n = min_.numel();
  for (int64_t i = 0; i < n; ++i) {
    if (hi[i] <= lo[i]) {
      // epsilon can round away in float32 for large coefficients; fall back
      // to the next representable value so apply() never divides by zero
      hi[i] = std::max(lo[i] + static_cast<float>(kEpsilon),
                       std::nextafter(lo[i],
                                      std::numeric_limits<float>::infinity()));
    }
  }
  fitted_ = true;
}

Tensor MinMaxScaler::apply(const Tensor& spectrum) const {
  if (!fitted_) throw NotFitted("MinMaxScaler: apply() before fit");
  if (!spectrum.same_shape(min_))
    throw ShapeMismatch("MinMaxScaler: spectrum shape " + spectrum.shape_str() +
                        " does not match fitted shape " + min_.shape_str());
  Tensor out(spectrum.shape());
  const float* s = spectrum.data();
  const float* lo = min_.data();
  const float* hi = max_.data();
  float* d = out.data();
  const int64_t n = spectrum.numel();
  for (int64_t i = 0; i < n; ++i) {
    float v = (s[i] - lo[i]) / (hi[i] - lo[i]);
    d[i] = std::clamp(v, 0.0f, 1.0f);
  }
  return out;
}

void MinMaxScaler::save(const std::filesystem::path& path) const {
  if (!fitted_) throw NotFitted("MinMaxScaler: save() before fit");
  std::vector<TensorEntry> entries;
  entries.push_back({"per_coefficient_min", min_});
  entries.push_back({"per_coefficient_max", max_});
  nlohmann::json meta;
  meta["kind"] = "minmax_scaler";
  write_tensor_file(path, entries, meta);
}

MinMaxScaler MinMaxScaler::load(const std::filesystem::path& path) {
  TensorFile file = read_tensor_file(path);
  MinMaxScaler scaler;
  scaler.min_ = file.require("per_coefficient_min");
  scaler.max_ = file.require("per_coefficient_max");
  scaler.any_ = true;
  scaler.fitted_ = true;
  return scaler;
}

MinMaxScaler fit_minmax(const std::vector<Tensor>& sample) {
  if (sample.empty()) throw EmptySample("fit_minmax: empty sample");
  MinMaxScaler scaler;
  for (const Tensor& t : sample) scaler.update(t);
  scaler.finalize();
  return scaler;
}

}  // namespace gdl
