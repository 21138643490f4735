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

#include "gdl/imgio.hpp"

#include <fstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "gdl/errors.hpp"

namespace gdl {

namespace {

Image from_bgr_mat(const cv::Mat& bgr) {
  Image out(bgr.rows, bgr.cols);
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  if (!rgb.isContinuous()) rgb = rgb.clone();
  std::memcpy(out.px.data(), rgb.data, out.px.size());
  return out;
}

cv::Mat to_bgr_mat(const Image& img) {
  cv::Mat rgb(img.h, img.w, CV_8UC3, const_cast<uint8_t*>(img.px.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  return bgr;
}

}  // namespace

Image decode_image_file(const std::filesystem::path& path) {
  // IMREAD_COLOR replicates grayscale to 3 channels and drops alpha.
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw DecodeError("cannot decode image: " + path.string());
  return from_bgr_mat(bgr);
}

Image decode_image_bytes(const std::vector<uint8_t>& bytes) {
  cv::Mat bgr = cv::imdecode(bytes, cv::IMREAD_COLOR);
  if (bgr.empty()) throw DecodeError("cannot decode in-memory image buffer");
  return from_bgr_mat(bgr);
}

std::vector<uint8_t> encode_jpeg_system(const Image& img, int quality) {
  std::vector<uint8_t> buf;
  std::vector<int> params = {cv::IMWRITE_JPEG_QUALITY, quality};
  if (!cv::imencode(".jpg", to_bgr_mat(img), buf, params))
    throw EncodeError("system jpeg encoder failed (quality " +
                      std::to_string(quality) + ")");
  return buf;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  if (!cv::imwrite(path.string(), to_bgr_mat(img)))
    throw EncodeError("cannot write png: " + path.string());
}

std::optional<ImageHeader> probe_image_header(
    const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  unsigned char sig[8] = {};
  is.read(reinterpret_cast<char*>(sig), 8);
  if (!is) return std::nullopt;

  auto read_be16 = [&is]() -> int {
    unsigned char b[2];
    is.read(reinterpret_cast<char*>(b), 2);
    return is ? (b[0] << 8) | b[1] : -1;
  };
  auto read_be32 = [&is]() -> int64_t {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) return -1;
    return (int64_t(b[0]) << 24) | (b[1] << 16) | (b[2] << 8) | b[3];
  };

  static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G',
                                           0x0d, 0x0a, 0x1a, 0x0a};
  if (std::memcmp(sig, png_sig, 8) == 0) {
    // IHDR is required to be the first chunk: length, "IHDR", width, height.
    is.seekg(8 + 4);
    char tag[4];
    is.read(tag, 4);
    if (!is || std::memcmp(tag, "IHDR", 4) != 0) return std::nullopt;
    int64_t w = read_be32();
    int64_t h = read_be32();
    if (w <= 0 || h <= 0) return std::nullopt;
    return ImageHeader{static_cast<int>(w), static_cast<int>(h), "png"};
  }

  if (sig[0] == 0xff && sig[1] == 0xd8) {  // SOI
    is.seekg(2);
    while (is) {
      int marker0 = is.get();
      if (marker0 != 0xff) return std::nullopt;
      int marker = is.get();
      while (marker == 0xff) marker = is.get();
      if (marker < 0) return std::nullopt;
      if (marker == 0xd8 || (marker >= 0xd0 && marker <= 0xd7)) continue;
      int len = read_be16();
      if (len < 2) return std::nullopt;
      if (marker >= 0xc0 && marker <= 0xcf && marker != 0xc4 &&
          marker != 0xc8 && marker != 0xcc) {  // SOFn
        is.get();                              // precision
        int h = read_be16();
        int w = read_be16();
        if (w <= 0 || h <= 0) return std::nullopt;
        return ImageHeader{w, h, "jpeg"};
      }
      is.seekg(len - 2, std::ios::cur);
    }
  }
  return std::nullopt;
}

}  // namespace gdl
