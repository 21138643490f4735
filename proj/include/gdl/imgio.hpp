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

#ifndef GDL_IMGIO_HPP_
#define GDL_IMGIO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "gdl/image.hpp"

namespace gdl {

/// Decodes a PNG/JPEG file to 8-bit RGB. Grayscale sources are replicated to
/// three channels and alpha channels are dropped. Throws DecodeError.
Image decode_image_file(const std::filesystem::path& path);

/// Decodes an in-memory compressed buffer (any format OpenCV recognizes).
Image decode_image_bytes(const std::vector<uint8_t>& bytes);

/// JPEG-encodes with the system codec. Throws EncodeError.
std::vector<uint8_t> encode_jpeg_system(const Image& img, int quality);

/// JPEG-encodes with the built-in baseline encoder (independent of the
/// system codec; 4:4:4, annex-K Huffman tables). Throws EncodeError.
std::vector<uint8_t> encode_jpeg_builtin(const Image& img, int quality);

void write_png(const std::filesystem::path& path, const Image& img);

struct ImageHeader {
  int width = 0;
  int height = 0;
  const char* format = "";  // "png" or "jpeg"
};

/// Cheap header sniff used by dataset scanning: validates the magic bytes
/// and pulls dimensions without decoding pixel data. Returns nullopt when the
/// file is not a recognizable PNG/JPEG.
std::optional<ImageHeader> probe_image_header(const std::filesystem::path& path);

}  // namespace gdl

#endif  // GDL_IMGIO_HPP_
