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

#include <cmath>
#include <fstream>

#include "gdl/errors.hpp"
#include "gdl/imgio.hpp"
#include "gdl/train.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace gdl;
namespace fs = std::filesystem;

namespace {

TrainConfig desk_config(uint64_t seed, int max_epochs, double lr = 1e-3,
                        int batch = 16) {
  TrainConfig cfg;
  cfg.lr_init = lr;
  cfg.batch_size = batch;
  cfg.seed = seed;
  cfg.max_epochs = max_epochs;
  return cfg;
}

// two Gaussian-blob classes: the blob sits upper-left for real images and
// lower-right for generated ones; linearly separable on raw pixels
Image blob_image(int label, uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> jitter(-8.0, 8.0);
  std::uniform_real_distribution<double> noise(-8.0, 8.0);
  const int size = 240;
  const double cx = (label == 0 ? 0.33 : 0.67) * size + jitter(rng);
  const double cy = (label == 0 ? 0.33 : 0.67) * size + jitter(rng);
  const double amp = 110.0 + jitter(rng);
  ImageF img(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      const double v = 60.0 + amp * std::exp(-d2 / (2.0 * 32.0 * 32.0));
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = v + noise(rng);
    }
  return to_u8(img);
}

Split write_blob_corpus(const fs::path& root, int per_class) {
  fs::create_directories(root / "toy" / "0_real");
  fs::create_directories(root / "toy" / "1_fake");
  std::vector<ImageRecord> records;
  for (int label = 0; label < 2; ++label) {
    const char* sub = label == 0 ? "0_real" : "1_fake";
    for (int i = 0; i < per_class; ++i) {
      const fs::path path =
          root / "toy" / sub / (std::to_string(i) + ".png");
      write_png(path, blob_image(label, uint64_t(label * 1000 + i)));
      records.push_back({path, label, "toy", label ? "toy_gen" : "camera"});
    }
  }
  return split_train_val(records, 0.10, 5);
}

// 16x-pooled raw pixel vector; average pooling is linear, so separability
// here implies raw-pixel linear separability
std::vector<float> pooled_features(const Image& img) {
  const Image window = center_crop(img, 224);
  std::vector<float> feat;
  feat.reserve(14 * 14 * 3);
  for (int by = 0; by < 14; ++by)
    for (int bx = 0; bx < 14; ++bx)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int y = 0; y < 16; ++y)
          for (int x = 0; x < 16; ++x)
            acc += window.at(by * 16 + y, bx * 16 + x, c);
        feat.push_back(float(acc / (16.0 * 16.0 * 255.0)));
      }
  return feat;
}

}  // namespace

TEST_CASE("plateau schedule transitions") {
  TrainConfig cfg;
  cfg.lr_init = 1e-4;
  cfg.seed = 0;

  SUBCASE("five stagnant epochs drop the rate tenfold") {
    TrainState state;
    state.lr = cfg.lr_init;
    state.best_val_acc = 0.9;
    for (int e = 1; e <= 5; ++e) {
      state.epoch = e;
      state = plateau_step(std::move(state), 0.9, cfg);
    }
    CHECK(state.lr == doctest::Approx(1e-5).epsilon(1e-12));
    CHECK(state.lr_drops == 1);
    CHECK_FALSE(state.terminate);
  }

  SUBCASE("arrival at the termination rate sets the flag") {
    TrainState state;
    state.lr = cfg.lr_init;
    state.best_val_acc = 0.9;
    state.lr_drops = 2;  // at 1e-6
    state.lr = 1e-6;
    for (int e = 1; e <= 5; ++e) {
      state.epoch = e;
      state = plateau_step(std::move(state), 0.9, cfg);
    }
    CHECK(state.lr == doctest::Approx(1e-7).epsilon(1e-9));
    CHECK(state.terminate);
  }

  SUBCASE("strict improvement never drops the rate") {
    TrainState state;
    state.lr = cfg.lr_init;
    double acc = 0.5;
    for (int e = 1; e <= 30; ++e) {
      state.epoch = e;
      acc += 0.01;
      state = plateau_step(std::move(state), acc, cfg);
    }
    CHECK(state.lr == cfg.lr_init);
    CHECK(state.lr_drops == 0);
    CHECK(state.best_epoch == 30);
  }

  SUBCASE("sub-epsilon improvement counts as stagnation") {
    TrainState state;
    state.lr = cfg.lr_init;
    state.best_val_acc = 0.9;
    for (int e = 1; e <= 5; ++e) {
      state.epoch = e;
      state = plateau_step(std::move(state), 0.9 + 0.5 * kImprovementEpsilon,
                           cfg);
    }
    CHECK(state.lr_drops == 1);
  }
}

TEST_CASE("scripted trace walks the full rate ladder and terminates") {
  TrainConfig cfg;
  cfg.lr_init = 1e-4;
  cfg.seed = 0;

  // 5 stagnant, improve, 5 stagnant, improve, ... until termination
  TrainState state;
  state.lr = cfg.lr_init;
  std::vector<double> lr_at_epoch;
  double base = 0.5;
  int epoch = 0;
  std::vector<double> trace;
  for (int block = 0; block < 4; ++block) {
    for (int i = 0; i < 5; ++i) trace.push_back(base);
    base += 0.05;
    trace.push_back(base);
  }
  double best_seen = 0.0;
  int best_epoch_expected = 0;
  for (double acc : trace) {
    if (state.terminate) break;
    state.epoch = ++epoch;
    lr_at_epoch.push_back(state.lr);
    if (acc > best_seen) {
      best_seen = acc;
      best_epoch_expected = epoch;
    }
    state = plateau_step(std::move(state), acc, cfg);
  }

  CHECK(state.terminate);
  CHECK(state.lr_drops == 3);  // 1e-4 -> 1e-5 -> 1e-6 -> 1e-7
  CHECK(state.lr == doctest::Approx(1e-7).epsilon(1e-9));
  // every learning rate seen is lr_init / 10^k, non-increasing
  double prev = 1e9;
  for (double lr : lr_at_epoch) {
    CHECK(lr <= prev);
    const double k = std::log10(cfg.lr_init / lr);
    CHECK(std::abs(k - std::round(k)) <= 1e-9);
    prev = lr;
  }
  CHECK(state.best_epoch == best_epoch_expected);
}

TEST_CASE("toy corpus is linearly separable (oracle) and the trainer fits it") {
  testutil::TempDir tmp("toytrain");
  const Split split = write_blob_corpus(tmp.path(), 60);

  // oracle first: a logistic regression on pooled raw pixels separates the
  // classes essentially perfectly
  std::vector<std::vector<float>> xs;
  std::vector<int> ys;
  for (const auto& rec : split.train) {
    xs.push_back(pooled_features(load_image(rec)));
    ys.push_back(rec.label);
  }
  const double lr_acc = oracles::logistic_regression_accuracy(xs, ys);
  REQUIRE(lr_acc >= 0.99);

  DetectorConfig cfg = DetectorConfig::defaults_for(Backbone::tiny_cnn);
  Detector det = build_detector(cfg, 7);
  const AugmentationPolicy none{PolicyKind::none, 0.5, {0, 3}, {30, 100}};
  const TrainState state =
      train_detector(det, split, none, desk_config(7, 20));
  CHECK(state.best_val_acc >= 0.99);
  CHECK(int(state.history.size()) <= 20);
}

TEST_CASE("max_epochs zero returns the initial detector and empty history") {
  testutil::TempDir tmp("toy0");
  const Split split = write_blob_corpus(tmp.path(), 8);
  DetectorConfig cfg = DetectorConfig::defaults_for(Backbone::tiny_cnn);
  Detector det = build_detector(cfg, 3);
  const WeightSnapshot before = det.snapshot_weights();

  const TrainState state =
      train_detector(det, split, {}, desk_config(3, 0));
  CHECK(state.history.empty());
  CHECK(state.epoch == 0);
  const WeightSnapshot after = det.snapshot_weights();
  REQUIRE(before.values.size() == after.values.size());
  for (size_t i = 0; i < before.values.size(); ++i)
    for (int64_t k = 0; k < before.values[i].numel(); ++k)
      CHECK(before.values[i][k] == after.values[i][k]);
}

TEST_CASE("identical seeds reproduce identical histories") {
  testutil::TempDir tmp("toydet");
  const Split split = write_blob_corpus(tmp.path(), 16);
  const AugmentationPolicy policy{PolicyKind::blur_jpeg_independent, 0.5,
                                  {0, 3}, {30, 100}};

  auto run = [&]() {
    DetectorConfig cfg = DetectorConfig::defaults_for(Backbone::tiny_cnn);
    Detector det = build_detector(cfg, 17);
    return train_detector(det, split, policy, desk_config(17, 3));
  };
  const TrainState a = run();
  const TrainState b = run();
  REQUIRE(a.history.size() == b.history.size());
  for (size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].train_loss == b.history[i].train_loss);
    CHECK(a.history[i].val_acc == b.history[i].val_acc);
    CHECK(a.history[i].lr == b.history[i].lr);
  }
}

TEST_CASE("returned weights are the best-validation checkpoint") {
  testutil::TempDir tmp("toybest");
  const Split split = write_blob_corpus(tmp.path(), 24);
  DetectorConfig cfg = DetectorConfig::defaults_for(Backbone::tiny_cnn);
  Detector det = build_detector(cfg, 9);
  const TrainState state =
      train_detector(det, split, {}, desk_config(9, 6));

  double max_acc = 0.0;
  for (const auto& row : state.history) max_acc = std::max(max_acc, row.val_acc);
  CHECK(state.best_val_acc == doctest::Approx(max_acc).epsilon(1e-12));

  // re-evaluate the returned weights on the validation split by hand
  std::vector<float> logits;
  std::vector<int> labels;
  for (const auto& rec : split.val) {
    const Tensor input = standardize(center_crop(load_image(rec), 224));
    Tensor batch({1, 3, 224, 224});
    std::copy_n(input.data(), input.numel(), batch.data());
    logits.push_back(det.score(batch)[0]);
    labels.push_back(rec.label);
  }
  CHECK(nn::binary_accuracy(logits, labels) ==
        doctest::Approx(state.best_val_acc).epsilon(1e-12));
}

TEST_CASE("diverging optimization aborts with state preserved") {
  testutil::TempDir tmp("toydiv");
  const Split split = write_blob_corpus(tmp.path(), 8);
  DetectorConfig cfg = DetectorConfig::defaults_for(Backbone::tiny_cnn);
  Detector det = build_detector(cfg, 13);
  TrainConfig bad = desk_config(13, 3, /*lr=*/1e20);
  TrainState observed;
  CHECK_THROWS_AS(
      train_detector(det, split, {}, bad, nullptr, {}, &observed),
      DivergedLoss);
  CHECK(observed.epoch >= 1);
}

TEST_CASE("history csv format") {
  testutil::TempDir tmp("hist");
  const std::vector<HistoryRow> rows = {{1, 0.5, 0.75, 1e-4},
                                        {2, 0.25, 0.875, 1e-4}};
  const auto path = tmp.path() / "history.csv";
  write_history_csv(rows, path);
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  CHECK(line == "epoch,train_loss,val_acc,lr");
  std::getline(is, line);
  CHECK(line.rfind("1,0.5,0.75,", 0) == 0);
}

TEST_CASE("train sinks write checkpoint and history artifacts") {
  testutil::TempDir tmp("sinks");
  const Split split = write_blob_corpus(tmp.path() / "data", 12);
  DetectorConfig cfg = DetectorConfig::defaults_for(Backbone::tiny_cnn);
  Detector det = build_detector(cfg, 19);
  TrainSinks sinks;
  sinks.checkpoint_path = tmp.path() / "ckpt.gdlt";
  sinks.history_csv = tmp.path() / "history.csv";
  sinks.augmentation_log_csv = tmp.path() / "aug.csv";
  const AugmentationPolicy policy{PolicyKind::blur_jpeg_joint, 0.5, {0, 3},
                                  {30, 100}};
  train_detector(det, split, policy, desk_config(19, 2), nullptr, sinks);
  CHECK(fs::exists(*sinks.checkpoint_path));
  CHECK(fs::exists(*sinks.history_csv));
  std::ifstream aug(*sinks.augmentation_log_csv);
  std::string header;
  std::getline(aug, header);
  CHECK(header.rfind("epoch,item,apply_blur", 0) == 0);
  int lines = 0;
  std::string line;
  while (std::getline(aug, line)) ++lines;
  CHECK(lines == int(split.train.size()) * 2);  // two epochs logged
}
