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

#ifndef GDL_MODEL_HPP_
#define GDL_MODEL_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gdl/evalmetrics.hpp"
#include "gdl/nn.hpp"
#include "gdl/rng.hpp"
#include "gdl/tensor.hpp"

namespace gdl {

/// Detector backbones. resnet50 and vgg11 are the standard pretrained image
/// classifiers; dct_resnet50 is the same residual architecture trained from
/// scratch on spectral input; tiny_cnn is the small from-scratch backbone the
/// desk-scale harness substitutes.
enum class Backbone { resnet50, vgg11, dct_resnet50, tiny_cnn };
enum class InputDomain { spatial, spectral };

const char* to_string(Backbone b);
const char* to_string(InputDomain d);
bool backbone_from_string(const std::string& name, Backbone* out);
bool input_domain_from_string(const std::string& name, InputDomain* out);

struct DetectorConfig {
  Backbone backbone = Backbone::resnet50;
  bool pretrained = true;
  InputDomain input_domain = InputDomain::spatial;

  /// Enforces the pairing rules: dct_resnet50 is never pretrained and always
  /// spectral; resnet50/vgg11 are spatial; tiny_cnn is never pretrained.
  /// Throws ConfigInvalid.
  void validate() const;

  /// The conventional configuration for a backbone (pretrained spatial for
  /// resnet50/vgg11, from-scratch spectral for dct_resnet50).
  static DetectorConfig defaults_for(Backbone b);
};

/// Snapshot of all trainable parameters plus normalization buffers.
struct WeightSnapshot {
  std::vector<Tensor> values;
};

/// A binary real-vs-generated detector: a backbone ending in a single-logit
/// head. Scores are raw logits; the downstream metric is rank-based so no
/// sigmoid is applied.
class Detector : public ScoringModel {
 public:
  Detector(const DetectorConfig& config, uint64_t seed);

  const DetectorConfig& config() const { return cfg_; }
  uint64_t seed() const { return seed_; }

  /// Eval-mode forward (deterministic: dropout off, batch norm running
  /// stats). Returns one logit per item; empty batch yields an empty vector.
  /// Throws NonFiniteInput when the batch contains NaN/inf.
  std::vector<float> score(const Tensor& batch) const override;

  /// Train-mode forward; the rng feeds stochastic layers.
  Tensor forward_train(const Tensor& batch, Rng& rng);
  Tensor backward(const Tensor& grad_logits);

  std::vector<nn::ParamRef> parameters();
  std::vector<nn::BufferRef> buffers();
  int64_t parameter_count();

  WeightSnapshot snapshot_weights();
  void restore_weights(const WeightSnapshot& snap);

  /// Loads parameters/buffers by name from a tensor container. Entries with
  /// no matching tensor in the model are ignored when `strict` is false;
  /// the head is always kept when `skip_head`.
  void load_state(const std::filesystem::path& path, bool skip_head,
                  bool strict);

  void save_checkpoint(const std::filesystem::path& path,
                       const nlohmann::json& manifest);
  static Detector load_checkpoint(const std::filesystem::path& path,
                                  nlohmann::json* manifest = nullptr);

  nn::Linear* head();

 private:
  DetectorConfig cfg_;
  uint64_t seed_;
  std::unique_ptr<nn::Sequential> net_;
};

/// Instantiates the backbone, replaces the classification head with a
/// seeded 1-logit layer, and (for pretrained configs) loads backbone weights
/// from `weights_dir` (default: $GDL_WEIGHTS_DIR). Throws CheckpointUnavailable
/// when pretrained weights are requested but no local copy exists.
Detector build_detector(
    const DetectorConfig& config, uint64_t seed,
    const std::optional<std::filesystem::path>& weights_dir = std::nullopt);

}  // namespace gdl

#endif  // GDL_MODEL_HPP_
