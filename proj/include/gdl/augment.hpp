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

#ifndef GDL_AUGMENT_HPP_
#define GDL_AUGMENT_HPP_

#include <array>
#include <string>
#include <vector>

#include "gdl/image.hpp"
#include "gdl/rng.hpp"
#include "gdl/tensor.hpp"

namespace gdl {

/// Stochastic augmentation policies applied to the full training image
/// before cropping and flipping.
///
///   none                   no blur, no compression
///   blur                   Gaussian blur with probability p
///   jpeg                   JPEG round-trip with probability p
///   blur_jpeg_joint        one shared coin applies blur+JPEG together
///   blur_jpeg_independent  two independent coins, one per transform
enum class PolicyKind {
  none,
  blur,
  jpeg,
  blur_jpeg_joint,
  blur_jpeg_independent,
};

/// The two JPEG encoder implementations a draw selects between.
enum class JpegEncoder { system, builtin };

const char* to_string(PolicyKind kind);
const char* to_string(JpegEncoder enc);
bool policy_kind_from_string(const std::string& name, PolicyKind* out);

struct AugmentationPolicy {
  PolicyKind kind = PolicyKind::none;
  double p = 0.5;  // application probability per transform coin
  std::array<double, 2> sigma_range{0.0, 3.0};
  std::array<int, 2> quality_range{30, 100};

  /// Encoders only accept qualities in this range; draws above it are
  /// clipped down to 95.
  static constexpr std::array<int, 2> kQualityClip{30, 95};

  void validate() const;  // throws ConfigInvalid
};

/// One reified stochastic decision, recorded for audit/replay.
struct AugmentationDraw {
  bool apply_blur = false;
  double sigma = 0.0;
  bool apply_jpeg = false;
  int quality = 0;  // as drawn, before clipping
  JpegEncoder encoder = JpegEncoder::system;

  int effective_quality() const {
    return std::clamp(quality, AugmentationPolicy::kQualityClip[0],
                      AugmentationPolicy::kQualityClip[1]);
  }
};

/// Samples one augmentation decision. Coins are drawn per the policy kind
/// (joint: one shared coin; independent: blur coin then JPEG coin); sigma,
/// quality and encoder are always drawn so the record is complete.
AugmentationDraw draw_policy(const AugmentationPolicy& policy, Rng& rng);

/// Symmetric 1-D Gaussian kernel truncated at 4*sigma: length
/// 2*ceil(4*sigma)+1, entries proportional to exp(-x^2 / (2*sigma^2)),
/// normalized to sum 1. Throws BadSigma for sigma <= 0 (sigma == 0 is
/// handled upstream as "skip blur").
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian convolution per channel with reflected boundaries.
/// The float overload is the exact arithmetic path; the 8-bit overload
/// rounds once at the end. sigma == 0 returns the input unchanged.
ImageF blur(const ImageF& img, double sigma);
Image blur(const Image& img, double sigma);

/// In-memory JPEG encode/decode round trip at clamp(quality, 30, 95) with
/// the selected backend. Dimensions are preserved.
Image jpeg_roundtrip(const Image& img, int quality, JpegEncoder encoder);

/// Applies blur/JPEG per an already-sampled draw (pre-crop stage).
Image augment_raster(const Image& img, const AugmentationDraw& draw);

/// Per-channel normalization constants of the large-scale pretraining corpus
/// the spatial backbones expect (applied after scaling to [0,1]).
inline constexpr std::array<float, 3> kImagenetMean{0.485f, 0.456f, 0.406f};
inline constexpr std::array<float, 3> kImagenetStd{0.229f, 0.224f, 0.225f};

inline constexpr int kCropSize = 224;

/// [0,1] scaling followed by per-channel standardization; HWC bytes in,
/// CHW float tensor out.
Tensor standardize(const Image& crop);

/// Inverse of standardize (returns the [0,1]-scaled CHW tensor).
Tensor unstandardize(const Tensor& standardized);

/// Scales to [0,1] without standardization (the spectral path's input).
Tensor to_unit_tensor(const Image& crop);

Image random_crop(const Image& img, int size, Rng& rng);  // throws TooSmall
Image center_crop(const Image& img, int size);            // throws TooSmall

/// Full training-time pipeline: draw -> blur -> JPEG -> random 224 crop ->
/// horizontal flip (p=0.5) -> [0,1] -> standardize. Returns a 3x224x224
/// float tensor. The optional out parameter receives the sampled draw.
Tensor apply_training_pipeline(const Image& img,
                               const AugmentationPolicy& policy, Rng& rng,
                               AugmentationDraw* out_draw = nullptr);

/// Same pre-crop and crop/flip stages but stopping at the [0,1] tensor;
/// the spectral path transforms this instead of standardizing.
Tensor apply_training_pipeline_unit(const Image& img,
                                    const AugmentationPolicy& policy, Rng& rng,
                                    AugmentationDraw* out_draw = nullptr);

}  // namespace gdl

#endif  // GDL_AUGMENT_HPP_
