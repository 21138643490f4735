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

#include "gdl/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "gdl/errors.hpp"

namespace gdl {

namespace {

constexpr char kMagic[4] = {'G', 'D', 'L', 'T'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw CheckpointUnavailable("tensor file truncated");
  return v;
}

}  // namespace

const Tensor* TensorFile::find(const std::string& name) const {
  for (const auto& e : tensors)
    if (e.name == name) return &e.tensor;
  return nullptr;
}

const Tensor& TensorFile::require(const std::string& name) const {
  const Tensor* t = find(name);
  if (!t) throw CheckpointUnavailable("tensor '" + name + "' missing from container");
  return *t;
}

void write_tensor_file(const std::filesystem::path& path,
                       const std::vector<TensorEntry>& tensors,
                       const nlohmann::json& meta) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open for writing: " + path.string());
  os.write(kMagic, 4);
  write_pod<uint32_t>(os, kVersion);
  write_pod<uint32_t>(os, static_cast<uint32_t>(tensors.size()));
  for (const auto& e : tensors) {
    write_pod<uint32_t>(os, static_cast<uint32_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    write_pod<uint32_t>(os, static_cast<uint32_t>(e.tensor.ndim()));
    for (int i = 0; i < e.tensor.ndim(); ++i)
      write_pod<int64_t>(os, e.tensor.dim(i));
    os.write(reinterpret_cast<const char*>(e.tensor.data()),
             static_cast<std::streamsize>(e.tensor.numel() * sizeof(float)));
  }
  const std::string meta_str = meta.dump();
  write_pod<uint64_t>(os, meta_str.size());
  os.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
  if (!os) throw Error("short write: " + path.string());
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw CheckpointUnavailable("cannot open tensor file: " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw CheckpointUnavailable("bad tensor file magic: " + path.string());
  const auto version = read_pod<uint32_t>(is);
  if (version != kVersion)
    throw CheckpointUnavailable("unsupported tensor file version " +
                                std::to_string(version));
  TensorFile out;
  const auto count = read_pod<uint32_t>(is);
  out.tensors.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<uint32_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const auto ndim = read_pod<uint32_t>(is);
    std::vector<int64_t> shape(ndim);
    for (auto& d : shape) d = read_pod<int64_t>(is);
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * sizeof(float)));
    if (!is) throw CheckpointUnavailable("tensor file truncated");
    out.tensors.push_back({std::move(name), std::move(t)});
  }
  const auto meta_len = read_pod<uint64_t>(is);
  std::string meta_str(meta_len, '\0');
  is.read(meta_str.data(), static_cast<std::streamsize>(meta_len));
  if (!is) throw CheckpointUnavailable("tensor file truncated");
  out.meta = meta_str.empty() ? nlohmann::json::object()
                              : nlohmann::json::parse(meta_str);
  return out;
}

}  // namespace gdl
