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

#include "gdl/errors.hpp"
#include "gdl/model.hpp"
#include "testutil.hpp"

using namespace gdl;

namespace {

Tensor random_batch(int64_t n, uint64_t seed) {
  Tensor batch({n, 3, 224, 224});
  Rng rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  for (int64_t i = 0; i < batch.numel(); ++i) batch[i] = u(rng);
  return batch;
}

std::vector<float> head_weights(Detector& d) {
  auto* head = d.head();
  REQUIRE(head != nullptr);
  std::vector<float> out(size_t(head->weight().numel()));
  std::copy_n(head->weight().data(), head->weight().numel(), out.begin());
  return out;
}

}  // namespace

TEST_CASE("config invariants") {
  DetectorConfig cfg = DetectorConfig::defaults_for(Backbone::dct_resnet50);
  CHECK_FALSE(cfg.pretrained);
  CHECK(cfg.input_domain == InputDomain::spectral);
  CHECK_NOTHROW(cfg.validate());

  cfg.pretrained = true;
  CHECK_THROWS_AS(cfg.validate(), ConfigInvalid);

  DetectorConfig spatial = DetectorConfig::defaults_for(Backbone::resnet50);
  CHECK(spatial.pretrained);
  spatial.input_domain = InputDomain::spectral;
  CHECK_THROWS_AS(spatial.validate(), ConfigInvalid);

  DetectorConfig tiny = DetectorConfig::defaults_for(Backbone::tiny_cnn);
  CHECK_FALSE(tiny.pretrained);
  tiny.pretrained = true;
  CHECK_THROWS_AS(tiny.validate(), ConfigInvalid);
}

TEST_CASE("pretrained weights missing raises CheckpointUnavailable") {
  DetectorConfig cfg = DetectorConfig::defaults_for(Backbone::resnet50);
  testutil::TempDir tmp("weights");
  CHECK_THROWS_AS(build_detector(cfg, 1, tmp.path()), CheckpointUnavailable);
}

TEST_CASE("tiny backbone: shape, determinism, and scoring contract") {
  DetectorConfig cfg = DetectorConfig::defaults_for(Backbone::tiny_cnn);
  Detector det = build_detector(cfg, 11);

  SUBCASE("logit shape (N,1)") {
    Rng rng(0);
    Tensor out = det.forward_train(random_batch(3, 5), rng);
    CHECK(out.shape() == std::vector<int64_t>{3, 1});
  }

  SUBCASE("same seed builds identical head weights, different seed differs") {
    Detector a = build_detector(cfg, 42);
    Detector b = build_detector(cfg, 42);
    Detector c = build_detector(cfg, 43);
    CHECK(head_weights(a) == head_weights(b));
    CHECK(head_weights(a) != head_weights(c));
  }

  SUBCASE("eval scoring is pure") {
    const Tensor batch = random_batch(2, 6);
    const auto s1 = det.score(batch);
    const auto s2 = det.score(batch);
    CHECK(s1 == s2);
  }

  SUBCASE("empty batch yields an empty score vector") {
    CHECK(det.score(Tensor({0, 3, 224, 224})).empty());
  }

  SUBCASE("non-finite input is rejected") {
    Tensor batch = random_batch(1, 7);
    batch[100] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(det.score(batch), NonFiniteInput);
  }
}

TEST_CASE("checkpoint round trip preserves behavior") {
  testutil::TempDir tmp("ckpt");
  DetectorConfig cfg = DetectorConfig::defaults_for(Backbone::tiny_cnn);
  Detector det = build_detector(cfg, 21);
  const Tensor batch = random_batch(2, 22);
  const auto before = det.score(batch);

  const auto path = tmp.path() / "checkpoint.gdlt";
  det.save_checkpoint(path, {{"note", "test"}});

  nlohmann::json manifest;
  Detector loaded = Detector::load_checkpoint(path, &manifest);
  CHECK(manifest["note"] == "test");
  CHECK(loaded.config().backbone == Backbone::tiny_cnn);
  const auto after = loaded.score(batch);
  REQUIRE(before.size() == after.size());
  for (size_t i = 0; i < before.size(); ++i) CHECK(before[i] == after[i]);
}

TEST_CASE("weight snapshots restore exactly") {
  DetectorConfig cfg = DetectorConfig::defaults_for(Backbone::tiny_cnn);
  Detector det = build_detector(cfg, 31);
  const Tensor batch = random_batch(2, 32);
  const auto before = det.score(batch);

  WeightSnapshot snap = det.snapshot_weights();
  for (auto& p : det.parameters())
    for (int64_t i = 0; i < p.value->numel(); ++i) (*p.value)[i] += 0.25f;
  CHECK(det.score(batch) != before);

  det.restore_weights(snap);
  CHECK(det.score(batch) == before);
}

TEST_CASE("resnet50 forward contract") {
  DetectorConfig cfg = DetectorConfig::defaults_for(Backbone::resnet50);
  cfg.pretrained = false;  // offline build
  Detector det = build_detector(cfg, 1);
  CHECK(det.parameter_count() > 23'000'000);  // bottleneck stack is present
  const auto scores = det.score(random_batch(2, 2));
  CHECK(scores.size() == 2);
  CHECK(std::isfinite(scores[0]));
  CHECK(std::isfinite(scores[1]));
}

TEST_CASE("vgg11 forward contract") {
  DetectorConfig cfg = DetectorConfig::defaults_for(Backbone::vgg11);
  cfg.pretrained = false;
  Detector det = build_detector(cfg, 1);
  CHECK(det.parameter_count() > 100'000'000);  // dense classifier present
  const auto scores = det.score(random_batch(1, 3));
  CHECK(scores.size() == 1);
  CHECK(std::isfinite(scores[0]));
}

TEST_CASE("dct variant shares the residual architecture") {
  DetectorConfig cfg = DetectorConfig::defaults_for(Backbone::dct_resnet50);
  Detector det = build_detector(cfg, 4);
  CHECK(det.config().input_domain == InputDomain::spectral);
  const auto scores = det.score(random_batch(1, 5));
  CHECK(scores.size() == 1);
}
