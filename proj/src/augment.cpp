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

#include "gdl/augment.hpp"

#include <algorithm>
#include <cmath>

#include "gdl/errors.hpp"
#include "gdl/imgio.hpp"

namespace gdl {

namespace {

// sigma below this is numerically an identity kernel
constexpr double kSigmaIdentity = 1e-3;

int reflect_index(int i, int n) {
  // scipy-style 'reflect': (d c b a | a b c d | d c b a)
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

}  // namespace

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::none: return "none";
    case PolicyKind::blur: return "blur";
    case PolicyKind::jpeg: return "jpeg";
    case PolicyKind::blur_jpeg_joint: return "blur_jpeg_joint";
    case PolicyKind::blur_jpeg_independent: return "blur_jpeg_independent";
  }
  return "?";
}

const char* to_string(JpegEncoder enc) {
  return enc == JpegEncoder::system ? "system" : "builtin";
}

bool policy_kind_from_string(const std::string& name, PolicyKind* out) {
  for (PolicyKind k : {PolicyKind::none, PolicyKind::blur, PolicyKind::jpeg,
                       PolicyKind::blur_jpeg_joint,
                       PolicyKind::blur_jpeg_independent}) {
    if (name == to_string(k)) {
      *out = k;
      return true;
    }
  }
  return false;
}

void AugmentationPolicy::validate() const {
  if (p < 0.0 || p > 1.0)
    throw ConfigInvalid("policy.p", "probability must lie in [0,1]");
  if (sigma_range[0] < 0.0 || sigma_range[1] < sigma_range[0])
    throw ConfigInvalid("policy.sigma_range",
                        "need 0 <= min <= max");
  if (quality_range[0] > quality_range[1] || quality_range[0] < 1 ||
      quality_range[1] > 100)
    throw ConfigInvalid("policy.quality_range",
                        "need 1 <= min <= max <= 100");
}

AugmentationDraw draw_policy(const AugmentationPolicy& policy, Rng& rng) {
  AugmentationDraw draw;
  std::bernoulli_distribution coin(policy.p);
  switch (policy.kind) {
    case PolicyKind::none:
      break;
    case PolicyKind::blur:
      draw.apply_blur = coin(rng);
      break;
    case PolicyKind::jpeg:
      draw.apply_jpeg = coin(rng);
      break;
    case PolicyKind::blur_jpeg_joint: {
      const bool both = coin(rng);
      draw.apply_blur = both;
      draw.apply_jpeg = both;
      break;
    }
    case PolicyKind::blur_jpeg_independent:
      draw.apply_blur = coin(rng);
      draw.apply_jpeg = coin(rng);
      break;
  }
  draw.sigma = std::uniform_real_distribution<double>(
      policy.sigma_range[0], policy.sigma_range[1])(rng);
  draw.quality = std::uniform_int_distribution<int>(
      policy.quality_range[0], policy.quality_range[1])(rng);
  draw.encoder = std::uniform_int_distribution<int>(0, 1)(rng) == 0
                     ? JpegEncoder::system
                     : JpegEncoder::builtin;
  return draw;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (sigma <= 0.0) throw BadSigma("gaussian_kernel: sigma must be > 0");
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(double(i) * i) / (2.0 * sigma * sigma));
    kernel[i + radius] = v;
    sum += v;
  }
  for (double& v : kernel) v /= sum;
  return kernel;
}

ImageF blur(const ImageF& img, double sigma) {
  if (sigma < 0.0) throw BadSigma("blur: sigma must be >= 0");
  if (sigma < kSigmaIdentity) return img;
  const std::vector<double> kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size()) / 2;
  const int h = img.h, w = img.w;

  // horizontal pass, then vertical
  ImageF tmp(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc[3] = {0, 0, 0};
      for (int t = -radius; t <= radius; ++t) {
        const int xs = reflect_index(x + t, w);
        const double k = kernel[t + radius];
        acc[0] += k * img.at(y, xs, 0);
        acc[1] += k * img.at(y, xs, 1);
        acc[2] += k * img.at(y, xs, 2);
      }
      tmp.at(y, x, 0) = acc[0];
      tmp.at(y, x, 1) = acc[1];
      tmp.at(y, x, 2) = acc[2];
    }
  }
  ImageF out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc[3] = {0, 0, 0};
      for (int t = -radius; t <= radius; ++t) {
        const int ys = reflect_index(y + t, h);
        const double k = kernel[t + radius];
        acc[0] += k * tmp.at(ys, x, 0);
        acc[1] += k * tmp.at(ys, x, 1);
        acc[2] += k * tmp.at(ys, x, 2);
      }
      out.at(y, x, 0) = acc[0];
      out.at(y, x, 1) = acc[1];
      out.at(y, x, 2) = acc[2];
    }
  }
  return out;
}

Image blur(const Image& img, double sigma) {
  if (sigma < 0.0) throw BadSigma("blur: sigma must be >= 0");
  if (sigma < kSigmaIdentity) return img;
  return to_u8(blur(to_float(img), sigma));
}

Image jpeg_roundtrip(const Image& img, int quality, JpegEncoder encoder) {
  const int q = std::clamp(quality, AugmentationPolicy::kQualityClip[0],
                           AugmentationPolicy::kQualityClip[1]);
  std::vector<uint8_t> bytes;
  try {
    bytes = encoder == JpegEncoder::system ? encode_jpeg_system(img, q)
                                           : encode_jpeg_builtin(img, q);
  } catch (const EncodeError& e) {
    throw EncodeError(std::string("jpeg_roundtrip [") + to_string(encoder) +
                      "]: " + e.what());
  }
  Image out = decode_image_bytes(bytes);
  if (out.h != img.h || out.w != img.w)
    throw EncodeError(std::string("jpeg_roundtrip [") + to_string(encoder) +
                      "]: decoded dimensions changed");
  return out;
}

Image augment_raster(const Image& img, const AugmentationDraw& draw) {
  Image out = img;
  if (draw.apply_blur && draw.sigma >= kSigmaIdentity)
    out = blur(out, draw.sigma);
  if (draw.apply_jpeg)
    out = jpeg_roundtrip(out, draw.effective_quality(), draw.encoder);
  return out;
}

Tensor standardize(const Image& crop) {
  Tensor t({3, crop.h, crop.w});
  const int64_t plane = int64_t(crop.h) * crop.w;
  float* d = t.data();
  for (int c = 0; c < 3; ++c) {
    const float mean = kImagenetMean[size_t(c)];
    const float inv_std = 1.0f / kImagenetStd[size_t(c)];
    for (int64_t i = 0; i < plane; ++i)
      d[c * plane + i] =
          (float(crop.px[size_t(i) * 3 + size_t(c)]) / 255.0f - mean) * inv_std;
  }
  return t;
}

Tensor unstandardize(const Tensor& standardized) {
  if (standardized.ndim() != 3 || standardized.dim(0) != 3)
    throw ShapeMismatch("unstandardize: expected 3xHxW tensor");
  Tensor t(standardized.shape());
  const int64_t plane = standardized.dim(1) * standardized.dim(2);
  const float* s = standardized.data();
  float* d = t.data();
  for (int c = 0; c < 3; ++c)
    for (int64_t i = 0; i < plane; ++i)
      d[c * plane + i] = s[c * plane + i] * kImagenetStd[size_t(c)] +
                         kImagenetMean[size_t(c)];
  return t;
}

Tensor to_unit_tensor(const Image& crop) {
  Tensor t({3, crop.h, crop.w});
  const int64_t plane = int64_t(crop.h) * crop.w;
  float* d = t.data();
  for (int c = 0; c < 3; ++c)
    for (int64_t i = 0; i < plane; ++i)
      d[c * plane + i] = float(crop.px[size_t(i) * 3 + size_t(c)]) / 255.0f;
  return t;
}

Image random_crop(const Image& img, int size, Rng& rng) {
  if (img.h < size || img.w < size)
    throw TooSmall("random_crop: image " + std::to_string(img.w) + "x" +
                   std::to_string(img.h) + " smaller than crop " +
                   std::to_string(size));
  const int y0 = std::uniform_int_distribution<int>(0, img.h - size)(rng);
  const int x0 = std::uniform_int_distribution<int>(0, img.w - size)(rng);
  return crop(img, y0, x0, size, size);
}

Image center_crop(const Image& img, int size) {
  if (img.h < size || img.w < size)
    throw TooSmall("center_crop: image " + std::to_string(img.w) + "x" +
                   std::to_string(img.h) + " smaller than crop " +
                   std::to_string(size));
  return crop(img, (img.h - size) / 2, (img.w - size) / 2, size, size);
}

namespace {

// shared pre-crop + crop/flip stages; the two pipelines differ only in the
// final normalization
Image cropped_flipped(const Image& img, const AugmentationPolicy& policy,
                      Rng& rng, AugmentationDraw* out_draw) {
  AugmentationDraw draw = draw_policy(policy, rng);
  if (out_draw) *out_draw = draw;
  Image aug = augment_raster(img, draw);
  Image window = random_crop(aug, kCropSize, rng);
  if (std::bernoulli_distribution(0.5)(rng)) window = hflip(window);
  return window;
}

}  // namespace

Tensor apply_training_pipeline(const Image& img,
                               const AugmentationPolicy& policy, Rng& rng,
                               AugmentationDraw* out_draw) {
  return standardize(cropped_flipped(img, policy, rng, out_draw));
}

Tensor apply_training_pipeline_unit(const Image& img,
                                    const AugmentationPolicy& policy, Rng& rng,
                                    AugmentationDraw* out_draw) {
  return to_unit_tensor(cropped_flipped(img, policy, rng, out_draw));
}

}  // namespace gdl
