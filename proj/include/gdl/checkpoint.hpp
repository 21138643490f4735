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

#ifndef GDL_CHECKPOINT_HPP_
#define GDL_CHECKPOINT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gdl/tensor.hpp"

namespace gdl {

// Binary tensor container used for model checkpoints, pretrained backbone
// weights, and the spectral MinMax scaler.
//
// Layout (little endian):
//   magic "GDLT", u32 version,
//   u32 tensor count, then per tensor:
//     u32 name length, name bytes, u32 ndim, i64 dims..., f32 data...
//   u64 metadata length, metadata bytes (JSON)

struct TensorEntry {
  std::string name;
  Tensor tensor;
};

struct TensorFile {
  std::vector<TensorEntry> tensors;
  nlohmann::json meta;

  const Tensor* find(const std::string& name) const;
  /// Throws CheckpointUnavailable when no tensor carries the name.
  const Tensor& require(const std::string& name) const;
};

void write_tensor_file(const std::filesystem::path& path,
                       const std::vector<TensorEntry>& tensors,
                       const nlohmann::json& meta);

TensorFile read_tensor_file(const std::filesystem::path& path);

}  // namespace gdl

#endif  // GDL_CHECKPOINT_HPP_
