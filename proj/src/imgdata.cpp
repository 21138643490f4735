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

#include "gdl/imgdata.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "gdl/errors.hpp"
#include "gdl/imgio.hpp"
#include "gdl/rng.hpp"

namespace fs = std::filesystem;

namespace gdl {

namespace {

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

bool decodable(const fs::path& p, bool full_decode) {
  if (!full_decode) return probe_image_header(p).has_value();
  try {
    decode_image_file(p);
    return true;
  } catch (const DecodeError&) {
    return false;
  }
}

}  // namespace

std::vector<ImageRecord> scan_dataset(const DatasetSpec& spec,
                                      ScanWarnings* warnings) {
  if (!fs::is_directory(spec.root))
    throw MissingCategory("dataset root does not exist: " +
                          spec.root.string());
  if (spec.categories.empty())
    throw ConfigInvalid("dataset.categories", "no categories selected");

  ScanWarnings local;
  ScanWarnings& warn = warnings ? *warnings : local;
  std::vector<ImageRecord> records;

  for (const std::string& category : spec.categories) {
    const fs::path cat_dir = spec.root / category;
    if (!fs::is_directory(cat_dir)) throw MissingCategory(category);

    for (const auto& [sub, label] :
         {std::pair<const char*, int>{"0_real", 0}, {"1_fake", 1}}) {
      const fs::path class_dir = cat_dir / sub;
      if (!fs::is_directory(class_dir))
        throw MissingCategory(category + "/" + sub);

      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(class_dir))
        if (entry.is_regular_file() && has_image_extension(entry.path()))
          files.push_back(entry.path());
      std::sort(files.begin(), files.end());
      if (files.empty())
        throw EmptyClass(category + "/" + sub + " has no images");

      const size_t before = records.size();
      for (const fs::path& file : files) {
        if (!decodable(file, spec.verify_decode)) {
          warn.undecodable.push_back(file);
          continue;
        }
        records.push_back(ImageRecord{
            file, label, category, label == 0 ? "camera" : spec.generator});
      }
      if (records.size() == before)
        throw EmptyClass(category + "/" + sub + " has no decodable images");
    }
  }

  if (!warn.undecodable.empty())
    std::cerr << "warning: skipped " << warn.undecodable.size()
              << " undecodable file(s) during scan\n";

  std::sort(records.begin(), records.end(),
            [](const ImageRecord& a, const ImageRecord& b) {
              return a.path < b.path;
            });
  return records;
}

Split split_train_val(const std::vector<ImageRecord>& records,
                      double val_fraction, uint64_t seed) {
  if (records.empty())
    throw ConfigInvalid("split", "no records to split");
  if (val_fraction < 0.0 || val_fraction >= 1.0)
    throw ConfigInvalid("dataset.val_fraction", "must lie in [0,1)");

  const int64_t total_val = static_cast<int64_t>(
      std::llround(val_fraction * static_cast<double>(records.size())));

  // strata keyed by (label, category); std::map gives a stable order
  std::map<std::pair<int, std::string>, std::vector<size_t>> strata;
  for (size_t i = 0; i < records.size(); ++i)
    strata[{records[i].label, records[i].category}].push_back(i);

  // largest-remainder apportionment of the validation quota
  struct Alloc {
    std::pair<int, std::string> key;
    int64_t count = 0;
    double remainder = 0.0;
  };
  std::vector<Alloc> allocs;
  int64_t assigned = 0;
  for (const auto& [key, idx] : strata) {
    const double exact = val_fraction * static_cast<double>(idx.size());
    Alloc a{key, static_cast<int64_t>(std::floor(exact)),
            exact - std::floor(exact)};
    assigned += a.count;
    allocs.push_back(std::move(a));
  }
  std::stable_sort(allocs.begin(), allocs.end(),
                   [](const Alloc& a, const Alloc& b) {
                     return a.remainder > b.remainder;
                   });
  for (auto& a : allocs) {
    if (assigned >= total_val) break;
    if (a.count < static_cast<int64_t>(strata[a.key].size())) {
      ++a.count;
      ++assigned;
    }
  }

  std::map<std::pair<int, std::string>, int64_t> quota;
  for (const auto& a : allocs) quota[a.key] = a.count;

  Split split;
  for (auto& [key, idx] : strata) {
    Rng rng = make_rng(seed, Stream::split,
                       hash_mix(std::hash<std::string>{}(key.second)),
                       static_cast<uint64_t>(key.first));
    std::shuffle(idx.begin(), idx.end(), rng);
    const int64_t take = quota[key];
    for (int64_t i = 0; i < static_cast<int64_t>(idx.size()); ++i)
      (i < take ? split.val : split.train).push_back(records[idx[size_t(i)]]);
  }

  auto by_path = [](const ImageRecord& a, const ImageRecord& b) {
    return a.path < b.path;
  };
  std::sort(split.train.begin(), split.train.end(), by_path);
  std::sort(split.val.begin(), split.val.end(), by_path);
  return split;
}

std::vector<ImageRecord> subset_classes(
    const std::vector<ImageRecord>& records, int k,
    const std::vector<std::string>& ordering) {
  std::set<std::string> present;
  for (const auto& r : records) present.insert(r.category);
  if (k < 1 || k > static_cast<int>(present.size()))
    throw BadK("subset_classes: k=" + std::to_string(k) +
               " outside [1," + std::to_string(present.size()) + "]");
  for (const auto& c : present)
    if (std::find(ordering.begin(), ordering.end(), c) == ordering.end())
      throw BadK("subset_classes: ordering does not list category '" + c + "'");

  std::set<std::string> keep(ordering.begin(),
                             ordering.begin() + std::min<size_t>(
                                                    size_t(k), ordering.size()));
  std::vector<ImageRecord> out;
  for (const auto& r : records)
    if (keep.count(r.category)) out.push_back(r);
  return out;
}

Image load_image(const ImageRecord& record) {
  return decode_image_file(record.path);
}

void write_manifest_csv(const std::vector<ImageRecord>& records,
                        const std::filesystem::path& root,
                        const std::filesystem::path& csv_path) {
  std::ofstream os(csv_path, std::ios::trunc);
  if (!os) throw Error("cannot write manifest: " + csv_path.string());
  os << "path,label,category,source\n";
  for (const auto& r : records) {
    os << fs::relative(r.path, root).generic_string() << "," << r.label << ","
       << r.category << "," << r.source << "\n";
  }
}

std::vector<ImageRecord> read_manifest_csv(
    const std::filesystem::path& csv_path, const std::filesystem::path& root) {
  std::ifstream is(csv_path);
  if (!is) throw Error("cannot read manifest: " + csv_path.string());
  std::vector<ImageRecord> records;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    size_t start = 0;
    for (size_t pos = 0; (pos = line.find(',', start)) != std::string::npos;
         start = pos + 1)
      cols.push_back(line.substr(start, pos - start));
    cols.push_back(line.substr(start));
    if (cols.size() != 4)
      throw Error("malformed manifest row: " + line);
    records.push_back(ImageRecord{root / cols[0], std::stoi(cols[1]), cols[2],
                                  cols[3]});
  }
  return records;
}

}  // namespace gdl
