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

#ifndef GDL_IMGDATA_HPP_
#define GDL_IMGDATA_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "gdl/image.hpp"

namespace gdl {

/// One image file with its class label, semantic category, and provenance.
struct ImageRecord {
  std::filesystem::path path;
  int label = 0;  // 0 = real, 1 = fake
  std::string category;
  std::string source;
};

/// On-disk corpus layout: <root>/<category>/{0_real,1_fake}/*.{png,jpg,...}
struct DatasetSpec {
  std::filesystem::path root;
  std::vector<std::string> categories;
  double val_fraction = 0.10;
  uint64_t split_seed = 0;
  std::string generator = "progan";  // provenance recorded on fake records
  bool verify_decode = false;        // fully decode every file at scan time
};

struct Split {
  std::vector<ImageRecord> train;
  std::vector<ImageRecord> val;
};

struct ScanWarnings {
  std::vector<std::filesystem::path> undecodable;
};

/// Walks the selected category directories and returns every decodable image
/// in deterministic lexicographic order. Files failing the decodability check
/// (header probe, or a full decode when spec.verify_decode) are recorded in
/// `warnings` and skipped, with a summary warning on stderr.
///
/// Throws MissingCategory when a requested category directory (or its
/// 0_real/1_fake subdirectory) is absent, EmptyClass when a class subfolder
/// contains no images.
std::vector<ImageRecord> scan_dataset(const DatasetSpec& spec,
                                      ScanWarnings* warnings = nullptr);

/// Validation split stratified by (label, category): per-stratum counts are
/// apportioned by largest remainder so |val| = round(val_fraction * total)
/// exactly, and an identical seed reproduces the split byte for byte.
Split split_train_val(const std::vector<ImageRecord>& records,
                      double val_fraction, uint64_t seed);

/// Keeps records whose category is among the first k entries of `ordering`.
/// Throws BadK when k is out of [1, #distinct categories]; `ordering` must
/// cover every category present in `records`.
std::vector<ImageRecord> subset_classes(
    const std::vector<ImageRecord>& records, int k,
    const std::vector<std::string>& ordering);

/// Decodes a record to an 8-bit RGB raster. Grayscale is replicated to three
/// channels; alpha is dropped. Throws DecodeError.
Image load_image(const ImageRecord& record);

/// Manifest cache: CSV with columns path,label,category,source. Paths are
/// stored relative to the dataset root.
void write_manifest_csv(const std::vector<ImageRecord>& records,
                        const std::filesystem::path& root,
                        const std::filesystem::path& csv_path);
std::vector<ImageRecord> read_manifest_csv(
    const std::filesystem::path& csv_path, const std::filesystem::path& root);

}  // namespace gdl

#endif  // GDL_IMGDATA_HPP_
