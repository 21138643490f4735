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

#ifndef GDL_IMAGE_HPP_
#define GDL_IMAGE_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

namespace gdl {

/// 8-bit RGB raster, interleaved HWC.
struct Image {
  int h = 0;
  int w = 0;
  std::vector<uint8_t> px;  // size h*w*3

  Image() = default;
  Image(int height, int width)
      : h(height), w(width), px(static_cast<size_t>(height) * width * 3, 0) {}

  uint8_t& at(int y, int x, int c) {
    return px[(static_cast<size_t>(y) * w + x) * 3 + c];
  }
  uint8_t at(int y, int x, int c) const {
    return px[(static_cast<size_t>(y) * w + x) * 3 + c];
  }
  bool empty() const { return px.empty(); }
};

/// Double-precision RGB raster; the arithmetic domain of the blur path.
struct ImageF {
  int h = 0;
  int w = 0;
  std::vector<double> px;

  ImageF() = default;
  ImageF(int height, int width)
      : h(height), w(width), px(static_cast<size_t>(height) * width * 3, 0.0) {}

  double& at(int y, int x, int c) {
    return px[(static_cast<size_t>(y) * w + x) * 3 + c];
  }
  double at(int y, int x, int c) const {
    return px[(static_cast<size_t>(y) * w + x) * 3 + c];
  }
};

inline ImageF to_float(const Image& img) {
  ImageF out(img.h, img.w);
  for (size_t i = 0; i < img.px.size(); ++i)
    out.px[i] = static_cast<double>(img.px[i]);
  return out;
}

/// Rounds half away from zero and clamps to [0,255]; the single rounding step
/// of the float image path.
inline Image to_u8(const ImageF& img) {
  Image out(img.h, img.w);
  for (size_t i = 0; i < img.px.size(); ++i) {
    double v = std::round(img.px[i]);
    out.px[i] = static_cast<uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
  }
  return out;
}

/// Extracts the window at (y0,x0) of size (ch,cw). Caller checks bounds.
inline Image crop(const Image& img, int y0, int x0, int ch, int cw) {
  Image out(ch, cw);
  for (int y = 0; y < ch; ++y) {
    const uint8_t* src = &img.px[(static_cast<size_t>(y0 + y) * img.w + x0) * 3];
    uint8_t* dst = &out.px[static_cast<size_t>(y) * cw * 3];
    std::copy(src, src + static_cast<size_t>(cw) * 3, dst);
  }
  return out;
}

inline Image hflip(const Image& img) {
  Image out(img.h, img.w);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y, img.w - 1 - x, c);
  return out;
}

}  // namespace gdl

#endif  // GDL_IMAGE_HPP_
