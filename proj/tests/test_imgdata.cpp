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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <map>
#include <set>

#include <opencv2/imgcodecs.hpp>

#include "gdl/errors.hpp"
#include "gdl/imgdata.hpp"
#include "gdl/imgio.hpp"
#include "testutil.hpp"

using namespace gdl;
namespace fs = std::filesystem;

namespace {

DatasetSpec spec_for(const fs::path& root,
                     std::vector<std::string> categories) {
  DatasetSpec spec;
  spec.root = root;
  spec.categories = std::move(categories);
  return spec;
}

}  // namespace

TEST_CASE("scan: counts, labels, and deterministic order") {
  testutil::TempDir tmp("scan");
  testutil::write_tiny_corpus(tmp.path(), {"cat"}, 4, 4, 64);
  const auto records = scan_dataset(spec_for(tmp.path(), {"cat"}));
  REQUIRE(records.size() == 8);
  int real = 0, fake = 0;
  for (const auto& r : records) {
    (r.label == 0 ? real : fake)++;
    CHECK(r.category == "cat");
    CHECK((r.label == 0 ? r.source == "camera" : r.source == "progan"));
  }
  CHECK(real == 4);
  CHECK(fake == 4);
  CHECK(std::is_sorted(records.begin(), records.end(),
                       [](const ImageRecord& a, const ImageRecord& b) {
                         return a.path < b.path;
                       }));
}

TEST_CASE("scan: record count is the sum over categories and classes") {
  // small-scale version of the full-corpus bookkeeping: categories x
  // (real + fake) images, nothing lost or double counted
  testutil::TempDir tmp("scan20");
  std::vector<std::string> categories;
  for (int i = 0; i < 20; ++i) categories.push_back("c" + std::to_string(i));
  testutil::write_tiny_corpus(tmp.path(), categories, 3, 3, 32);
  const auto records = scan_dataset(spec_for(tmp.path(), categories));
  CHECK(records.size() == 20 * (3 + 3));
}

TEST_CASE("scan: error paths") {
  testutil::TempDir tmp("scanerr");
  testutil::write_tiny_corpus(tmp.path(), {"cat"}, 2, 2, 32);

  SUBCASE("missing category") {
    CHECK_THROWS_AS(scan_dataset(spec_for(tmp.path(), {"cat", "horse"})),
                    MissingCategory);
    try {
      scan_dataset(spec_for(tmp.path(), {"cat", "horse"}));
    } catch (const MissingCategory& e) {
      CHECK(std::string(e.what()).find("horse") != std::string::npos);
    }
  }

  SUBCASE("empty class folder") {
    fs::create_directories(tmp.path() / "dog" / "0_real");
    fs::create_directories(tmp.path() / "dog" / "1_fake");
    write_png(tmp.path() / "dog" / "0_real" / "a.png",
              testutil::solid_image(32, 32, 1, 2, 3));
    CHECK_THROWS_AS(scan_dataset(spec_for(tmp.path(), {"dog"})), EmptyClass);
  }

  SUBCASE("undecodable files are skipped with a warning") {
    std::ofstream(tmp.path() / "cat" / "0_real" / "junk.png") << "not a png";
    ScanWarnings warnings;
    const auto records =
        scan_dataset(spec_for(tmp.path(), {"cat"}), &warnings);
    CHECK(records.size() == 4);
    REQUIRE(warnings.undecodable.size() == 1);
    CHECK(warnings.undecodable[0].filename() == "junk.png");
  }
}

TEST_CASE("split: sizes, determinism, and stratification") {
  testutil::TempDir tmp("split");
  testutil::write_tiny_corpus(tmp.path(), {"cat", "horse"}, 25, 25, 32);
  const auto records = scan_dataset(spec_for(tmp.path(), {"cat", "horse"}));
  REQUIRE(records.size() == 100);

  SUBCASE("ten percent of one hundred") {
    const Split split = split_train_val(records, 0.10, 3);
    CHECK(split.val.size() == 10);
    CHECK(split.train.size() == 90);
  }

  SUBCASE("zero fraction keeps everything in train") {
    const Split split = split_train_val(records, 0.0, 3);
    CHECK(split.val.empty());
    CHECK(split.train.size() == records.size());
  }

  SUBCASE("identical seeds give identical splits") {
    const Split a = split_train_val(records, 0.10, 7);
    const Split b = split_train_val(records, 0.10, 7);
    REQUIRE(a.train.size() == b.train.size());
    for (size_t i = 0; i < a.train.size(); ++i)
      CHECK(a.train[i].path == b.train[i].path);
    for (size_t i = 0; i < a.val.size(); ++i)
      CHECK(a.val[i].path == b.val[i].path);
    const Split c = split_train_val(records, 0.10, 8);
    bool any_differs = c.val.size() != a.val.size();
    for (size_t i = 0; !any_differs && i < a.val.size(); ++i)
      any_differs = a.val[i].path != c.val[i].path;
    CHECK(any_differs);
  }

  SUBCASE("union equals input and the sets are disjoint") {
    for (uint64_t seed : {0, 1, 2, 3, 4}) {
      const Split split = split_train_val(records, 0.13, seed);
      CHECK(split.train.size() + split.val.size() == records.size());
      std::set<std::string> seen;
      for (const auto& r : split.train) seen.insert(r.path.string());
      for (const auto& r : split.val) {
        CHECK(seen.count(r.path.string()) == 0);
        seen.insert(r.path.string());
      }
      CHECK(seen.size() == records.size());
    }
  }
}

TEST_CASE("split: validation label balance stays near the corpus balance") {
  // deliberately imbalanced corpus: 40 real vs 20 fake per category
  testutil::TempDir tmp("strat");
  testutil::write_tiny_corpus(tmp.path(), {"cat", "horse"}, 40, 20, 32);
  const auto records = scan_dataset(spec_for(tmp.path(), {"cat", "horse"}));
  const double corpus_fake = 40.0 / 120.0;
  for (uint64_t seed : {1, 2, 3, 4, 5, 6, 7, 8}) {
    const Split split = split_train_val(records, 0.10, seed);
    int fake = 0;
    for (const auto& r : split.val) fake += r.label;
    const double val_fake = double(fake) / double(split.val.size());
    CHECK(std::abs(val_fake - corpus_fake) <= 0.02);
  }
}

TEST_CASE("subset_classes") {
  testutil::TempDir tmp("subset");
  const std::vector<std::string> ordering = {"cat", "horse", "bird", "car"};
  testutil::write_tiny_corpus(tmp.path(), ordering, 2, 2, 32);
  const auto records = scan_dataset(spec_for(tmp.path(), ordering));

  SUBCASE("full k is the identity") {
    const auto subset = subset_classes(records, 4, ordering);
    CHECK(subset.size() == records.size());
  }

  SUBCASE("k=2 keeps only the first two categories of the ordering") {
    const auto subset = subset_classes(records, 2, ordering);
    CHECK(subset.size() == 8);
    for (const auto& r : subset)
      CHECK((r.category == "cat" || r.category == "horse"));
  }

  SUBCASE("nesting: smaller k is a subset of larger k") {
    for (int k1 = 1; k1 <= 4; ++k1) {
      const auto a = subset_classes(records, k1, ordering);
      for (int k2 = k1; k2 <= 4; ++k2) {
        const auto b = subset_classes(records, k2, ordering);
        std::set<std::string> bigger;
        for (const auto& r : b) bigger.insert(r.path.string());
        for (const auto& r : a) CHECK(bigger.count(r.path.string()) == 1);
      }
    }
  }

  SUBCASE("out-of-range k") {
    CHECK_THROWS_AS(subset_classes(records, 0, ordering), BadK);
    CHECK_THROWS_AS(subset_classes(records, 5, ordering), BadK);
  }

  SUBCASE("scan->subset->split bookkeeping") {
    const auto subset = subset_classes(records, 3, ordering);
    const Split split = split_train_val(subset, 0.25, 11);
    CHECK(split.train.size() + split.val.size() == subset.size());
  }
}

TEST_CASE("load_image") {
  testutil::TempDir tmp("load");

  SUBCASE("png shape") {
    const auto path = tmp.path() / "img.png";
    write_png(path, testutil::noise_image(256, 256, 1));
    const Image img = load_image({path, 0, "x", "camera"});
    CHECK(img.h == 256);
    CHECK(img.w == 256);
    CHECK(img.px.size() == size_t(256) * 256 * 3);
  }

  SUBCASE("grayscale sources replicate to three channels") {
    const auto path = tmp.path() / "gray.png";
    cv::Mat gray(32, 32, CV_8UC1);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) gray.at<uint8_t>(y, x) = uint8_t(x * 7);
    cv::imwrite(path.string(), gray);
    const Image img = load_image({path, 0, "x", "camera"});
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        CHECK(img.at(y, x, 0) == img.at(y, x, 1));
        CHECK(img.at(y, x, 1) == img.at(y, x, 2));
      }
  }

  SUBCASE("truncated file raises DecodeError") {
    const auto good = tmp.path() / "good.png";
    write_png(good, testutil::noise_image(128, 128, 2));
    std::ifstream is(good, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(is)),
                            std::istreambuf_iterator<char>());
    const auto bad = tmp.path() / "trunc.png";
    std::ofstream os(bad, std::ios::binary);
    os.write(bytes.data(), std::streamsize(bytes.size() / 4));
    os.close();
    CHECK_THROWS_AS(load_image({bad, 0, "x", "camera"}), DecodeError);
  }
}

TEST_CASE("manifest csv round trip") {
  testutil::TempDir tmp("manifest");
  testutil::write_tiny_corpus(tmp.path(), {"cat"}, 3, 2, 32);
  const auto records = scan_dataset(spec_for(tmp.path(), {"cat"}));
  const auto csv = tmp.path() / "manifest.csv";
  write_manifest_csv(records, tmp.path(), csv);
  const auto loaded = read_manifest_csv(csv, tmp.path());
  REQUIRE(loaded.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].path == records[i].path);
    CHECK(loaded[i].label == records[i].label);
    CHECK(loaded[i].category == records[i].category);
    CHECK(loaded[i].source == records[i].source);
  }
}
