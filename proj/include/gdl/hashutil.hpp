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

#ifndef GDL_HASHUTIL_HPP_
#define GDL_HASHUTIL_HPP_

#include <filesystem>
#include <string>

namespace gdl {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file_hex(const std::filesystem::path& path);

}  // namespace gdl

#endif  // GDL_HASHUTIL_HPP_
