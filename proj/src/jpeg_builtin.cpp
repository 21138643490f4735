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

// Minimal baseline sequential JFIF encoder (4:4:4, annex-K quantization and
// Huffman tables). Kept deliberately independent of the system codec so the
// two JPEG augmentation backends produce genuinely different artifact
// profiles.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gdl/errors.hpp"
#include "gdl/image.hpp"
#include "gdl/imgio.hpp"
#include "gdl/spectral.hpp"

namespace gdl {

namespace {

const uint8_t kZigzag[64] = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

const int kLumaQuant[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

const int kChromaQuant[64] = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

const uint8_t kDcLumaBits[17] = {0, 0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
const uint8_t kDcLumaVals[12] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
const uint8_t kDcChromaBits[17] = {0, 0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
const uint8_t kDcChromaVals[12] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};

const uint8_t kAcLumaBits[17] = {0, 0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d};
const uint8_t kAcLumaVals[162] = {
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06,
    0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08,
    0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72,
    0x82, 0x09, 0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44, 0x45,
    0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
    0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75,
    0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3,
    0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6,
    0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9,
    0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2,
    0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4,
    0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa};

const uint8_t kAcChromaBits[17] = {0, 0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77};
const uint8_t kAcChromaVals[162] = {
    0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41,
    0x51, 0x07, 0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91,
    0xa1, 0xb1, 0xc1, 0x09, 0x23, 0x33, 0x52, 0xf0, 0x15, 0x62, 0x72, 0xd1,
    0x0a, 0x16, 0x24, 0x34, 0xe1, 0x25, 0xf1, 0x17, 0x18, 0x19, 0x1a, 0x26,
    0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44,
    0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58,
    0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74,
    0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
    0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a,
    0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4,
    0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7,
    0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda,
    0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf2, 0xf3, 0xf4,
    0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa};

struct HuffTable {
  uint16_t code[256];
  uint8_t size[256];
};

HuffTable build_huff(const uint8_t bits[17], const uint8_t* vals, int nvals) {
  HuffTable t{};
  uint16_t code = 0;
  int k = 0;
  for (int len = 1; len <= 16; ++len) {
    for (int i = 0; i < bits[len]; ++i) {
      if (k >= nvals) throw EncodeError("builtin jpeg: bad huffman spec");
      t.code[vals[k]] = code;
      t.size[vals[k]] = static_cast<uint8_t>(len);
      ++code;
      ++k;
    }
    code <<= 1;
  }
  return t;
}

class BitWriter {
 public:
  explicit BitWriter(std::vector<uint8_t>& out) : out_(out) {}

  void put(uint32_t value, int nbits) {
    for (int i = nbits - 1; i >= 0; --i) {
      acc_ = (acc_ << 1) | ((value >> i) & 1u);
      if (++nacc_ == 8) flush_byte();
    }
  }

  void finish() {
    while (nacc_ != 0) {  // pad with 1s to the byte boundary
      acc_ = (acc_ << 1) | 1u;
      if (++nacc_ == 8) flush_byte();
    }
  }

 private:
  void flush_byte() {
    uint8_t b = static_cast<uint8_t>(acc_ & 0xff);
    out_.push_back(b);
    if (b == 0xff) out_.push_back(0x00);  // byte stuffing
    acc_ = 0;
    nacc_ = 0;
  }

  std::vector<uint8_t>& out_;
  uint32_t acc_ = 0;
  int nacc_ = 0;
};

int bit_category(int v) {
  int a = v < 0 ? -v : v;
  int n = 0;
  while (a) {
    ++n;
    a >>= 1;
  }
  return n;
}

void put_marker(std::vector<uint8_t>& out, uint8_t m) {
  out.push_back(0xff);
  out.push_back(m);
}

void put_u16(std::vector<uint8_t>& out, int v) {
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>(v & 0xff));
}

std::array<int, 64> scaled_quant(const int* base, int quality) {
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::array<int, 64> q{};
  for (int i = 0; i < 64; ++i) {
    int v = (base[i] * scale + 50) / 100;
    q[i] = std::clamp(v, 1, 255);
  }
  return q;
}

}  // namespace

std::vector<uint8_t> encode_jpeg_builtin(const Image& img, int quality) {
  if (img.h <= 0 || img.w <= 0 || img.px.size() != size_t(img.h) * img.w * 3)
    throw EncodeError("builtin jpeg encoder: malformed raster");
  quality = std::clamp(quality, 1, 100);

  const auto quant_luma = scaled_quant(kLumaQuant, quality);
  const auto quant_chroma = scaled_quant(kChromaQuant, quality);
  const HuffTable dc_luma = build_huff(kDcLumaBits, kDcLumaVals, 12);
  const HuffTable dc_chroma = build_huff(kDcChromaBits, kDcChromaVals, 12);
  const HuffTable ac_luma = build_huff(kAcLumaBits, kAcLumaVals, 162);
  const HuffTable ac_chroma = build_huff(kAcChromaBits, kAcChromaVals, 162);

  std::vector<uint8_t> out;
  out.reserve(static_cast<size_t>(img.h) * img.w / 2 + 1024);

  put_marker(out, 0xd8);  // SOI

  put_marker(out, 0xe0);  // APP0 / JFIF
  put_u16(out, 16);
  const char jfif[5] = {'J', 'F', 'I', 'F', '\0'};
  out.insert(out.end(), jfif, jfif + 5);
  out.push_back(1);
  out.push_back(1);
  out.push_back(0);
  put_u16(out, 1);
  put_u16(out, 1);
  out.push_back(0);
  out.push_back(0);

  for (int id = 0; id < 2; ++id) {  // DQT (stored in zigzag order)
    put_marker(out, 0xdb);
    put_u16(out, 67);
    out.push_back(static_cast<uint8_t>(id));
    const auto& q = id == 0 ? quant_luma : quant_chroma;
    for (int i = 0; i < 64; ++i)
      out.push_back(static_cast<uint8_t>(q[kZigzag[i]]));
  }

  put_marker(out, 0xc0);  // SOF0, 3 components, 4:4:4
  put_u16(out, 17);
  out.push_back(8);
  put_u16(out, img.h);
  put_u16(out, img.w);
  out.push_back(3);
  for (int comp = 0; comp < 3; ++comp) {
    out.push_back(static_cast<uint8_t>(comp + 1));
    out.push_back(0x11);
    out.push_back(comp == 0 ? 0 : 1);
  }

  auto put_dht = [&out](int tc, int th, const uint8_t bits[17],
                        const uint8_t* vals) {
    int nvals = 0;
    for (int len = 1; len <= 16; ++len) nvals += bits[len];
    put_marker(out, 0xc4);
    put_u16(out, 2 + 1 + 16 + nvals);
    out.push_back(static_cast<uint8_t>((tc << 4) | th));
    for (int len = 1; len <= 16; ++len) out.push_back(bits[len]);
    out.insert(out.end(), vals, vals + nvals);
  };
  put_dht(0, 0, kDcLumaBits, kDcLumaVals);
  put_dht(1, 0, kAcLumaBits, kAcLumaVals);
  put_dht(0, 1, kDcChromaBits, kDcChromaVals);
  put_dht(1, 1, kAcChromaBits, kAcChromaVals);

  put_marker(out, 0xda);  // SOS
  put_u16(out, 12);
  out.push_back(3);
  out.push_back(1);
  out.push_back(0x00);
  out.push_back(2);
  out.push_back(0x11);
  out.push_back(3);
  out.push_back(0x11);
  out.push_back(0);
  out.push_back(63);
  out.push_back(0);

  // Entropy-coded scan: interleaved Y, Cb, Cr blocks per 8x8 MCU.
  const Eigen::MatrixXd& basis = dct_matrix(8);
  BitWriter bw(out);
  int dc_pred[3] = {0, 0, 0};
  const int mcu_rows = (img.h + 7) / 8;
  const int mcu_cols = (img.w + 7) / 8;

  Eigen::Matrix<double, 8, 8> block;
  for (int by = 0; by < mcu_rows; ++by) {
    for (int bx = 0; bx < mcu_cols; ++bx) {
      for (int comp = 0; comp < 3; ++comp) {
        for (int y = 0; y < 8; ++y) {
          const int sy = std::min(by * 8 + y, img.h - 1);
          for (int x = 0; x < 8; ++x) {
            const int sx = std::min(bx * 8 + x, img.w - 1);
            const double r = img.at(sy, sx, 0);
            const double g = img.at(sy, sx, 1);
            const double b = img.at(sy, sx, 2);
            double v;
            if (comp == 0)
              v = 0.299 * r + 0.587 * g + 0.114 * b;
            else if (comp == 1)
              v = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0;
            else
              v = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0;
            block(y, x) = v - 128.0;
          }
        }
        // The orthonormal 8x8 DCT-II coincides with the codec's transform.
        Eigen::Matrix<double, 8, 8> spec =
            basis * block * basis.transpose();
        const auto& q = comp == 0 ? quant_luma : quant_chroma;
        int zz[64];
        for (int i = 0; i < 64; ++i) {
          const int idx = kZigzag[i];
          zz[i] = static_cast<int>(
              std::lround(spec(idx / 8, idx % 8) / q[idx]));
        }

        const HuffTable& dc = comp == 0 ? dc_luma : dc_chroma;
        const HuffTable& ac = comp == 0 ? ac_luma : ac_chroma;

        const int diff = zz[0] - dc_pred[comp];
        dc_pred[comp] = zz[0];
        const int s = bit_category(diff);
        bw.put(dc.code[s], dc.size[s]);
        if (s > 0) {
          const int v = diff < 0 ? diff + (1 << s) - 1 : diff;
          bw.put(static_cast<uint32_t>(v), s);
        }

        int run = 0;
        for (int i = 1; i < 64; ++i) {
          if (zz[i] == 0) {
            ++run;
            continue;
          }
          while (run > 15) {
            bw.put(ac.code[0xf0], ac.size[0xf0]);  // ZRL
            run -= 16;
          }
          const int sa = bit_category(zz[i]);
          const int sym = (run << 4) | sa;
          bw.put(ac.code[sym], ac.size[sym]);
          const int v = zz[i] < 0 ? zz[i] + (1 << sa) - 1 : zz[i];
          bw.put(static_cast<uint32_t>(v), sa);
          run = 0;
        }
        if (run > 0) bw.put(ac.code[0x00], ac.size[0x00]);  // EOB
      }
    }
  }
  bw.finish();

  put_marker(out, 0xd9);  // EOI
  return out;
}

}  // namespace gdl
