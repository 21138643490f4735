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

#include "gdl/model.hpp"

#include <cstdlib>

#include "gdl/checkpoint.hpp"
#include "gdl/errors.hpp"

namespace gdl {

namespace {

using nn::BatchNorm2d;
using nn::Bottleneck;
using nn::Conv2d;
using nn::Dropout;
using nn::Flatten;
using nn::GlobalAvgPool;
using nn::Linear;
using nn::MaxPool2d;
using nn::ReLU;
using nn::Sequential;

std::unique_ptr<Sequential> make_resnet_stage(int* in_c, int width,
                                              int blocks, int stride) {
  auto stage = std::make_unique<Sequential>();
  for (int i = 0; i < blocks; ++i) {
    stage->add<Bottleneck>(std::to_string(i), *in_c, width,
                           i == 0 ? stride : 1);
    *in_c = width * Bottleneck::kExpansion;
  }
  return stage;
}

std::unique_ptr<Sequential> make_resnet50() {
  auto net = std::make_unique<Sequential>();
  net->add<Conv2d>("conv1", 3, 64, 7, 2, 3);
  net->add<BatchNorm2d>("bn1", 64);
  net->add<ReLU>("relu");
  net->add<MaxPool2d>("maxpool", 3, 2, 1);
  int in_c = 64;
  net->add_layer("layer1", make_resnet_stage(&in_c, 64, 3, 1));
  net->add_layer("layer2", make_resnet_stage(&in_c, 128, 4, 2));
  net->add_layer("layer3", make_resnet_stage(&in_c, 256, 6, 2));
  net->add_layer("layer4", make_resnet_stage(&in_c, 512, 3, 2));
  net->add<GlobalAvgPool>("avgpool");
  net->add<Linear>("head", 2048, 1);
  return net;
}

std::unique_ptr<Sequential> make_vgg11() {
  auto net = std::make_unique<Sequential>();
  auto features = std::make_unique<Sequential>();
  // torchvision layer indices, so pretrained containers map one-to-one
  int idx = 0;
  int in_c = 3;
  for (int spec : {64, -1, 128, -1, 256, 256, -1, 512, 512, -1, 512, 512, -1}) {
    if (spec == -1) {
      features->add<MaxPool2d>(std::to_string(idx++), 2, 2, 0);
    } else {
      features->add<Conv2d>(std::to_string(idx++), in_c, spec, 3, 1, 1, true);
      features->add<ReLU>(std::to_string(idx++));
      in_c = spec;
    }
  }
  net->add_layer("features", std::move(features));
  net->add<Flatten>("flatten");
  auto classifier = std::make_unique<Sequential>();
  classifier->add<Linear>("0", 512 * 7 * 7, 4096);
  classifier->add<ReLU>("1");
  classifier->add<Dropout>("2", 0.5);
  classifier->add<Linear>("3", 4096, 4096);
  classifier->add<ReLU>("4");
  classifier->add<Dropout>("5", 0.5);
  net->add_layer("classifier", std::move(classifier));
  net->add<Linear>("head", 4096, 1);
  return net;
}

std::unique_ptr<Sequential> make_tiny_cnn() {
  auto net = std::make_unique<Sequential>();
  net->add<Conv2d>("conv1", 3, 16, 5, 4, 2);
  net->add<BatchNorm2d>("bn1", 16);
  net->add<ReLU>("relu1");
  net->add<Conv2d>("conv2", 16, 32, 3, 2, 1);
  net->add<BatchNorm2d>("bn2", 32);
  net->add<ReLU>("relu2");
  net->add<Conv2d>("conv3", 32, 64, 3, 2, 1);
  net->add<BatchNorm2d>("bn3", 64);
  net->add<ReLU>("relu3");
  net->add<GlobalAvgPool>("avgpool");
  net->add<Linear>("head", 64, 1);
  return net;
}

std::filesystem::path pretrained_weights_path(
    Backbone b, const std::optional<std::filesystem::path>& weights_dir) {
  std::filesystem::path dir;
  if (weights_dir) {
    dir = *weights_dir;
  } else if (const char* env = std::getenv("GDL_WEIGHTS_DIR")) {
    dir = env;
  } else {
    throw CheckpointUnavailable(
        "pretrained weights requested but no weights directory configured "
        "(set GDL_WEIGHTS_DIR or detector.weights_dir; see "
        "tools/export_backbone_weights.py)");
  }
  const char* file = b == Backbone::resnet50 ? "resnet50_imagenet.gdlt"
                                             : "vgg11_imagenet.gdlt";
  return dir / file;
}

}  // namespace

const char* to_string(Backbone b) {
  switch (b) {
    case Backbone::resnet50: return "resnet50";
    case Backbone::vgg11: return "vgg11";
    case Backbone::dct_resnet50: return "dct_resnet50";
    case Backbone::tiny_cnn: return "tiny_cnn";
  }
  return "?";
}

const char* to_string(InputDomain d) {
  return d == InputDomain::spatial ? "spatial" : "spectral";
}

bool backbone_from_string(const std::string& name, Backbone* out) {
  for (Backbone b : {Backbone::resnet50, Backbone::vgg11,
                     Backbone::dct_resnet50, Backbone::tiny_cnn}) {
    if (name == to_string(b)) {
      *out = b;
      return true;
    }
  }
  return false;
}

bool input_domain_from_string(const std::string& name, InputDomain* out) {
  if (name == "spatial") {
    *out = InputDomain::spatial;
    return true;
  }
  if (name == "spectral") {
    *out = InputDomain::spectral;
    return true;
  }
  return false;
}

void DetectorConfig::validate() const {
  if (backbone == Backbone::dct_resnet50) {
    if (pretrained)
      throw ConfigInvalid("detector.pretrained",
                          "dct_resnet50 is always trained from scratch");
    if (input_domain != InputDomain::spectral)
      throw ConfigInvalid("detector.input_domain",
                          "dct_resnet50 consumes spectral input");
  }
  if (backbone == Backbone::tiny_cnn && pretrained)
    throw ConfigInvalid("detector.pretrained",
                        "tiny_cnn has no pretrained weights");
  if ((backbone == Backbone::resnet50 || backbone == Backbone::vgg11) &&
      input_domain != InputDomain::spatial)
    throw ConfigInvalid("detector.input_domain",
                        "resnet50/vgg11 consume spatial input");
}

DetectorConfig DetectorConfig::defaults_for(Backbone b) {
  DetectorConfig cfg;
  cfg.backbone = b;
  cfg.pretrained = (b == Backbone::resnet50 || b == Backbone::vgg11);
  cfg.input_domain = b == Backbone::dct_resnet50 ? InputDomain::spectral
                                                 : InputDomain::spatial;
  return cfg;
}

Detector::Detector(const DetectorConfig& config, uint64_t seed)
    : cfg_(config), seed_(seed) {
  cfg_.validate();
  switch (cfg_.backbone) {
    case Backbone::resnet50:
    case Backbone::dct_resnet50:
      net_ = make_resnet50();
      break;
    case Backbone::vgg11:
      net_ = make_vgg11();
      break;
    case Backbone::tiny_cnn:
      net_ = make_tiny_cnn();
      break;
  }
  Rng rng = make_rng(seed, Stream::init);
  net_->init_params(rng);
}

std::vector<float> Detector::score(const Tensor& batch) const {
  if (batch.numel() == 0) return {};
  if (batch.ndim() != 4)
    throw ShapeMismatch("Detector::score: expected NCHW batch");
  if (!nn::all_finite(batch))
    throw NonFiniteInput("Detector::score: batch contains NaN/inf");
  auto* self = const_cast<Detector*>(this);
  Tensor logits = self->net_->forward(batch, /*training=*/false, nullptr);
  std::vector<float> out(static_cast<size_t>(logits.numel()));
  std::copy_n(logits.data(), logits.numel(), out.begin());
  return out;
}

Tensor Detector::forward_train(const Tensor& batch, Rng& rng) {
  return net_->forward(batch, /*training=*/true, &rng);
}

Tensor Detector::backward(const Tensor& grad_logits) {
  return net_->backward(grad_logits);
}

std::vector<nn::ParamRef> Detector::parameters() {
  std::vector<nn::ParamRef> params;
  net_->visit("", &params, nullptr);
  return params;
}

std::vector<nn::BufferRef> Detector::buffers() {
  std::vector<nn::BufferRef> bufs;
  net_->visit("", nullptr, &bufs);
  return bufs;
}

int64_t Detector::parameter_count() {
  int64_t n = 0;
  for (const auto& p : parameters()) n += p.value->numel();
  return n;
}

WeightSnapshot Detector::snapshot_weights() {
  WeightSnapshot snap;
  for (const auto& p : parameters()) snap.values.push_back(*p.value);
  for (const auto& b : buffers()) snap.values.push_back(*b.value);
  return snap;
}

void Detector::restore_weights(const WeightSnapshot& snap) {
  size_t i = 0;
  for (auto& p : parameters()) *p.value = snap.values.at(i++);
  for (auto& b : buffers()) *b.value = snap.values.at(i++);
}

void Detector::load_state(const std::filesystem::path& path, bool skip_head,
                          bool strict) {
  const TensorFile file = read_tensor_file(path);
  auto assign = [&](const std::string& name, Tensor* dst) {
    if (skip_head && name.rfind("head.", 0) == 0) return;
    const Tensor* src = file.find(name);
    if (!src) {
      if (strict)
        throw CheckpointUnavailable("tensor '" + name + "' missing in " +
                                    path.string());
      return;
    }
    if (!src->same_shape(*dst))
      throw CheckpointUnavailable("tensor '" + name + "' has shape " +
                                  src->shape_str() + ", expected " +
                                  dst->shape_str());
    *dst = *src;
  };
  for (auto& p : parameters()) assign(p.name, p.value);
  for (auto& b : buffers()) assign(b.name, b.value);
}

void Detector::save_checkpoint(const std::filesystem::path& path,
                               const nlohmann::json& manifest) {
  std::vector<TensorEntry> entries;
  for (auto& p : parameters()) entries.push_back({p.name, *p.value});
  for (auto& b : buffers()) entries.push_back({b.name, *b.value});
  nlohmann::json meta = manifest;
  meta["detector"] = {{"backbone", to_string(cfg_.backbone)},
                      {"pretrained", cfg_.pretrained},
                      {"input_domain", to_string(cfg_.input_domain)},
                      {"seed", seed_}};
  write_tensor_file(path, entries, meta);
}

Detector Detector::load_checkpoint(const std::filesystem::path& path,
                                   nlohmann::json* manifest) {
  const TensorFile file = read_tensor_file(path);
  if (!file.meta.contains("detector"))
    throw CheckpointUnavailable("checkpoint has no detector metadata: " +
                                path.string());
  const auto& det = file.meta["detector"];
  DetectorConfig cfg;
  if (!backbone_from_string(det.value("backbone", ""), &cfg.backbone))
    throw CheckpointUnavailable("checkpoint names unknown backbone");
  cfg.pretrained = det.value("pretrained", false);
  if (!input_domain_from_string(det.value("input_domain", "spatial"),
                                &cfg.input_domain))
    throw CheckpointUnavailable("checkpoint names unknown input domain");
  Detector detector(cfg, det.value("seed", uint64_t{0}));
  detector.load_state(path, /*skip_head=*/false, /*strict=*/true);
  if (manifest) *manifest = file.meta;
  return detector;
}

nn::Linear* Detector::head() {
  return dynamic_cast<nn::Linear*>(net_->child("head"));
}

Detector build_detector(
    const DetectorConfig& config, uint64_t seed,
    const std::optional<std::filesystem::path>& weights_dir) {
  config.validate();
  Detector detector(config, seed);
  if (config.pretrained) {
    const auto path = pretrained_weights_path(config.backbone, weights_dir);
    if (!std::filesystem::exists(path))
      throw CheckpointUnavailable("pretrained weights not found: " +
                                  path.string());
    // backbone tensors only; the fresh head stays seeded
    detector.load_state(path, /*skip_head=*/true, /*strict=*/false);
  }
  return detector;
}

}  // namespace gdl
