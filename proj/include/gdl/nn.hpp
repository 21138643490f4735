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

#ifndef GDL_NN_HPP_
#define GDL_NN_HPP_

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gdl/rng.hpp"
#include "gdl/tensor.hpp"

// Minimal CPU training stack: NCHW layers with explicit forward/backward and
// an Adam optimizer. GEMM-backed convolutions via im2col. Single-threaded and
// bit-deterministic for a fixed seed.

namespace gdl::nn {

struct ParamRef {
  std::string name;
  Tensor* value;
  Tensor* grad;
};

struct BufferRef {
  std::string name;
  Tensor* value;
};

class Layer {
 public:
  virtual ~Layer() = default;

  /// rng may be null when the layer draws no randomness (all layers in eval
  /// mode, and everything except Dropout in train mode).
  virtual Tensor forward(const Tensor& x, bool training, Rng* rng) = 0;

  /// Gradient w.r.t. the layer input; accumulates parameter gradients.
  /// Must follow a forward() call on the same layer.
  virtual Tensor backward(const Tensor& grad_out) = 0;

  virtual void visit(const std::string& /*prefix*/,
                     std::vector<ParamRef>* /*params*/,
                     std::vector<BufferRef>* /*buffers*/) {}

  /// Seeded parameter initialization; traversal order is creation order.
  virtual void init_params(Rng& /*rng*/) {}

  /// Drops forward caches (used when snapshotting weights).
  virtual void clear_cache() {}
};

class Conv2d final : public Layer {
 public:
  Conv2d(int in_c, int out_c, int kernel, int stride, int pad,
         bool bias = false);
  Tensor forward(const Tensor& x, bool training, Rng* rng) override;
  Tensor backward(const Tensor& grad_out) override;
  void visit(const std::string& prefix, std::vector<ParamRef>* params,
             std::vector<BufferRef>* buffers) override;
  void init_params(Rng& rng) override;
  void clear_cache() override { cols_ = Tensor(); }

 private:
  int in_c_, out_c_, k_, stride_, pad_;
  bool has_bias_;
  Tensor w_, gw_, b_, gb_;
  Tensor cols_;  // cached im2col patches, (N, C*k*k, OH*OW)
  std::vector<int64_t> x_shape_;
  int oh_ = 0, ow_ = 0;
};

class BatchNorm2d final : public Layer {
 public:
  explicit BatchNorm2d(int channels, double eps = 1e-5,
                       double momentum = 0.1);
  Tensor forward(const Tensor& x, bool training, Rng* rng) override;
  Tensor backward(const Tensor& grad_out) override;
  void visit(const std::string& prefix, std::vector<ParamRef>* params,
             std::vector<BufferRef>* buffers) override;
  void init_params(Rng& rng) override;
  void clear_cache() override { xhat_ = Tensor(); }

 private:
  void init_state();

  int channels_;
  double eps_, momentum_;
  Tensor gamma_, ggamma_, beta_, gbeta_;
  Tensor running_mean_, running_var_;
  Tensor xhat_;               // cached normalized input (train mode)
  std::vector<float> invstd_; // per-channel 1/sqrt(var+eps) of the last pass
  bool last_training_ = false;
  std::vector<int64_t> x_shape_;
};

class ReLU final : public Layer {
 public:
  Tensor forward(const Tensor& x, bool training, Rng* rng) override;
  Tensor backward(const Tensor& grad_out) override;
  void clear_cache() override { mask_.clear(); }

 private:
  std::vector<uint8_t> mask_;
};

class MaxPool2d final : public Layer {
 public:
  MaxPool2d(int kernel, int stride, int pad);
  Tensor forward(const Tensor& x, bool training, Rng* rng) override;
  Tensor backward(const Tensor& grad_out) override;
  void clear_cache() override { argmax_.clear(); }

 private:
  int k_, stride_, pad_;
  std::vector<int64_t> argmax_;  // flat input index per output element
  std::vector<int64_t> x_shape_;
};

/// NCHW -> (N, C) mean over the spatial extent.
class GlobalAvgPool final : public Layer {
 public:
  Tensor forward(const Tensor& x, bool training, Rng* rng) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  std::vector<int64_t> x_shape_;
};

/// NCHW -> (N, C*H*W).
class Flatten final : public Layer {
 public:
  Tensor forward(const Tensor& x, bool training, Rng* rng) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  std::vector<int64_t> x_shape_;
};

class Linear final : public Layer {
 public:
  Linear(int in_features, int out_features, float init_std = 0.01f);
  Tensor forward(const Tensor& x, bool training, Rng* rng) override;
  Tensor backward(const Tensor& grad_out) override;
  void visit(const std::string& prefix, std::vector<ParamRef>* params,
             std::vector<BufferRef>* buffers) override;
  void init_params(Rng& rng) override;
  void clear_cache() override { x_ = Tensor(); }

  const Tensor& weight() const { return w_; }
  const Tensor& weight_grad() const { return gw_; }
  const Tensor& bias() const { return b_; }
  const Tensor& bias_grad() const { return gb_; }

 private:
  int in_f_, out_f_;
  float init_std_;
  Tensor w_, gw_, b_, gb_;
  Tensor x_;
};

class Dropout final : public Layer {
 public:
  explicit Dropout(double p) : p_(p) {}
  Tensor forward(const Tensor& x, bool training, Rng* rng) override;
  Tensor backward(const Tensor& grad_out) override;
  void clear_cache() override { mask_.clear(); }

 private:
  double p_;
  std::vector<float> mask_;
};

class Sequential final : public Layer {
 public:
  template <typename T, typename... Args>
  T* add(const std::string& name, Args&&... args) {
    auto layer = std::make_unique<T>(std::forward<Args>(args)...);
    T* raw = layer.get();
    children_.emplace_back(name, std::move(layer));
    return raw;
  }
  void add_layer(const std::string& name, std::unique_ptr<Layer> layer) {
    children_.emplace_back(name, std::move(layer));
  }

  Tensor forward(const Tensor& x, bool training, Rng* rng) override;
  Tensor backward(const Tensor& grad_out) override;
  void visit(const std::string& prefix, std::vector<ParamRef>* params,
             std::vector<BufferRef>* buffers) override;
  void init_params(Rng& rng) override;
  void clear_cache() override;

  Layer* child(const std::string& name);

 private:
  std::vector<std::pair<std::string, std::unique_ptr<Layer>>> children_;
};

/// Residual bottleneck: 1x1 -> 3x3(stride) -> 1x1(x4) with projection
/// shortcut when the shape changes.
class Bottleneck final : public Layer {
 public:
  Bottleneck(int in_c, int width, int stride);
  Tensor forward(const Tensor& x, bool training, Rng* rng) override;
  Tensor backward(const Tensor& grad_out) override;
  void visit(const std::string& prefix, std::vector<ParamRef>* params,
             std::vector<BufferRef>* buffers) override;
  void init_params(Rng& rng) override;
  void clear_cache() override;

  static constexpr int kExpansion = 4;

 private:
  Conv2d conv1_, conv2_, conv3_;
  BatchNorm2d bn1_, bn2_, bn3_;
  ReLU relu1_, relu2_, relu3_;
  bool has_down_;
  std::unique_ptr<Conv2d> down_conv_;
  std::unique_ptr<BatchNorm2d> down_bn_;
};

class Adam {
 public:
  Adam(std::vector<ParamRef> params, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);
  void zero_grad();
  void step(double lr);

 private:
  std::vector<ParamRef> params_;
  std::vector<Tensor> m_, v_;
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
};

/// Numerically stable binary cross-entropy from logits, averaged over the
/// batch. When grad is non-null it receives d(loss)/d(logits).
double bce_with_logits(const Tensor& logits, std::span<const float> targets,
                       Tensor* grad);

/// Fraction of items where (logit > 0) matches the 0/1 label.
double binary_accuracy(std::span<const float> logits,
                       std::span<const int> labels);

bool all_finite(const Tensor& t);

}  // namespace gdl::nn

#endif  // GDL_NN_HPP_
