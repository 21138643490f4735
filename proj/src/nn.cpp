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

#define EIGEN_DONT_PARALLELIZE
#include "gdl/nn.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "gdl/errors.hpp"

namespace gdl::nn {

namespace {

using RowMat =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

void check_nchw(const Tensor& x, const char* who) {
  if (x.ndim() != 4) throw ShapeMismatch(std::string(who) + ": expected NCHW");
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_c, int out_c, int kernel, int stride, int pad, bool bias)
    : in_c_(in_c),
      out_c_(out_c),
      k_(kernel),
      stride_(stride),
      pad_(pad),
      has_bias_(bias),
      w_({out_c, in_c, kernel, kernel}),
      gw_({out_c, in_c, kernel, kernel}) {
  if (has_bias_) {
    b_ = Tensor({out_c});
    gb_ = Tensor({out_c});
  }
}

void Conv2d::init_params(Rng& rng) {
  // He initialization, fan-out mode (what the reference image backbones use)
  const double std = std::sqrt(2.0 / (double(k_) * k_ * out_c_));
  std::normal_distribution<double> dist(0.0, std);
  for (int64_t i = 0; i < w_.numel(); ++i)
    w_[i] = static_cast<float>(dist(rng));
  if (has_bias_)
    for (int64_t i = 0; i < b_.numel(); ++i) b_[i] = 0.0f;
}

Tensor Conv2d::forward(const Tensor& x, bool /*training*/, Rng* /*rng*/) {
  check_nchw(x, "Conv2d");
  const int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (c != in_c_) throw ShapeMismatch("Conv2d: channel mismatch");
  oh_ = static_cast<int>((h + 2 * pad_ - k_) / stride_ + 1);
  ow_ = static_cast<int>((w + 2 * pad_ - k_) / stride_ + 1);
  const int64_t ckk = int64_t(in_c_) * k_ * k_;
  const int64_t spatial = int64_t(oh_) * ow_;
  x_shape_ = x.shape();

  cols_ = Tensor({n, ckk, spatial});
  Tensor out({n, out_c_, oh_, ow_});

  for (int64_t b = 0; b < n; ++b) {
    float* col = cols_.data() + b * ckk * spatial;
    const float* src = x.data() + b * c * h * w;
    int64_t row = 0;
    for (int ci = 0; ci < in_c_; ++ci) {
      for (int ky = 0; ky < k_; ++ky) {
        for (int kx = 0; kx < k_; ++kx, ++row) {
          float* dst = col + row * spatial;
          for (int oy = 0; oy < oh_; ++oy) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= h) {
              std::fill_n(dst + int64_t(oy) * ow_, ow_, 0.0f);
              continue;
            }
            const float* srow = src + (int64_t(ci) * h + iy) * w;
            for (int ox = 0; ox < ow_; ++ox) {
              const int ix = ox * stride_ - pad_ + kx;
              dst[int64_t(oy) * ow_ + ox] =
                  (ix < 0 || ix >= w) ? 0.0f : srow[ix];
            }
          }
        }
      }
    }
    CMapMat wm(w_.data(), out_c_, ckk);
    CMapMat xm(col, ckk, spatial);
    MapMat ym(out.data() + b * out_c_ * spatial, out_c_, spatial);
    ym.noalias() = wm * xm;
    if (has_bias_)
      for (int oc = 0; oc < out_c_; ++oc)
        ym.row(oc).array() += b_[oc];
  }
  return out;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  const int64_t n = x_shape_[0], c = x_shape_[1], h = x_shape_[2],
                w = x_shape_[3];
  const int64_t ckk = int64_t(in_c_) * k_ * k_;
  const int64_t spatial = int64_t(oh_) * ow_;
  Tensor dx(x_shape_);
  RowMat dcol(ckk, spatial);

  for (int64_t b = 0; b < n; ++b) {
    CMapMat gy(grad_out.data() + b * out_c_ * spatial, out_c_, spatial);
    CMapMat xm(cols_.data() + b * ckk * spatial, ckk, spatial);
    MapMat gw(gw_.data(), out_c_, ckk);
    gw.noalias() += gy * xm.transpose();
    if (has_bias_)
      for (int oc = 0; oc < out_c_; ++oc) gb_[oc] += gy.row(oc).sum();

    CMapMat wm(w_.data(), out_c_, ckk);
    dcol.noalias() = wm.transpose() * gy;

    float* dst = dx.data() + b * c * h * w;
    int64_t row = 0;
    for (int ci = 0; ci < in_c_; ++ci) {
      for (int ky = 0; ky < k_; ++ky) {
        for (int kx = 0; kx < k_; ++kx, ++row) {
          const float* srow = dcol.data() + row * spatial;
          for (int oy = 0; oy < oh_; ++oy) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= h) continue;
            float* drow = dst + (int64_t(ci) * h + iy) * w;
            for (int ox = 0; ox < ow_; ++ox) {
              const int ix = ox * stride_ - pad_ + kx;
              if (ix >= 0 && ix < w) drow[ix] += srow[int64_t(oy) * ow_ + ox];
            }
          }
        }
      }
    }
  }
  return dx;
}

void Conv2d::visit(const std::string& prefix, std::vector<ParamRef>* params,
                   std::vector<BufferRef>* /*buffers*/) {
  if (params) {
    params->push_back({prefix + "weight", &w_, &gw_});
    if (has_bias_) params->push_back({prefix + "bias", &b_, &gb_});
  }
}

// ------------------------------------------------------------ BatchNorm2d

BatchNorm2d::BatchNorm2d(int channels, double eps, double momentum)
    : channels_(channels),
      eps_(eps),
      momentum_(momentum),
      gamma_({channels}),
      ggamma_({channels}),
      beta_({channels}),
      gbeta_({channels}),
      running_mean_({channels}),
      running_var_({channels}) {
  init_state();
}

void BatchNorm2d::init_params(Rng& /*rng*/) { init_state(); }

void BatchNorm2d::init_state() {
  for (int i = 0; i < channels_; ++i) {
    gamma_[i] = 1.0f;
    beta_[i] = 0.0f;
    running_mean_[i] = 0.0f;
    running_var_[i] = 1.0f;
  }
}

Tensor BatchNorm2d::forward(const Tensor& x, bool training, Rng* /*rng*/) {
  check_nchw(x, "BatchNorm2d");
  const int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (c != channels_) throw ShapeMismatch("BatchNorm2d: channel mismatch");
  const int64_t plane = h * w;
  const int64_t m = n * plane;
  x_shape_ = x.shape();
  last_training_ = training;
  Tensor out(x.shape());
  invstd_.assign(size_t(channels_), 0.0f);

  if (training) {
    xhat_ = Tensor(x.shape());
    for (int64_t ci = 0; ci < c; ++ci) {
      double sum = 0.0, sq = 0.0;
      for (int64_t b = 0; b < n; ++b) {
        const float* p = x.data() + (b * c + ci) * plane;
        for (int64_t i = 0; i < plane; ++i) {
          sum += p[i];
          sq += double(p[i]) * p[i];
        }
      }
      const double mean = sum / double(m);
      const double var = sq / double(m) - mean * mean;  // biased
      const float inv = static_cast<float>(1.0 / std::sqrt(var + eps_));
      invstd_[size_t(ci)] = inv;
      const float g = gamma_[ci], bt = beta_[ci], mu = float(mean);
      for (int64_t b = 0; b < n; ++b) {
        const float* p = x.data() + (b * c + ci) * plane;
        float* xh = xhat_.data() + (b * c + ci) * plane;
        float* o = out.data() + (b * c + ci) * plane;
        for (int64_t i = 0; i < plane; ++i) {
          xh[i] = (p[i] - mu) * inv;
          o[i] = g * xh[i] + bt;
        }
      }
      // unbiased variance feeds the running estimate
      const double var_u = m > 1 ? var * double(m) / double(m - 1) : var;
      running_mean_[ci] = float((1.0 - momentum_) * running_mean_[ci] +
                                momentum_ * mean);
      running_var_[ci] =
          float((1.0 - momentum_) * running_var_[ci] + momentum_ * var_u);
    }
  } else {
    for (int64_t ci = 0; ci < c; ++ci) {
      const float inv =
          static_cast<float>(1.0 / std::sqrt(double(running_var_[ci]) + eps_));
      invstd_[size_t(ci)] = inv;
      const float g = gamma_[ci], bt = beta_[ci], mu = running_mean_[ci];
      for (int64_t b = 0; b < n; ++b) {
        const float* p = x.data() + (b * c + ci) * plane;
        float* o = out.data() + (b * c + ci) * plane;
        for (int64_t i = 0; i < plane; ++i) o[i] = g * (p[i] - mu) * inv + bt;
      }
    }
  }
  return out;
}

Tensor BatchNorm2d::backward(const Tensor& grad_out) {
  const int64_t n = x_shape_[0], c = x_shape_[1], h = x_shape_[2],
                w = x_shape_[3];
  const int64_t plane = h * w;
  const int64_t m = n * plane;
  Tensor dx(x_shape_);

  for (int64_t ci = 0; ci < c; ++ci) {
    const float inv = invstd_[size_t(ci)];
    const float g = gamma_[ci];
    if (!last_training_) {
      // running statistics are constants; the transform is affine in x
      double db = 0.0;
      for (int64_t b = 0; b < n; ++b) {
        const float* gy = grad_out.data() + (b * c + ci) * plane;
        float* d = dx.data() + (b * c + ci) * plane;
        for (int64_t i = 0; i < plane; ++i) {
          d[i] = gy[i] * g * inv;
          db += gy[i];
        }
      }
      gbeta_[ci] += float(db);
      continue;
    }
    double sum_gy = 0.0, sum_gy_xh = 0.0;
    for (int64_t b = 0; b < n; ++b) {
      const float* gy = grad_out.data() + (b * c + ci) * plane;
      const float* xh = xhat_.data() + (b * c + ci) * plane;
      for (int64_t i = 0; i < plane; ++i) {
        sum_gy += gy[i];
        sum_gy_xh += double(gy[i]) * xh[i];
      }
    }
    ggamma_[ci] += float(sum_gy_xh);
    gbeta_[ci] += float(sum_gy);
    const float mean_gy = float(sum_gy / double(m));
    const float mean_gy_xh = float(sum_gy_xh / double(m));
    const float scale = g * inv;
    for (int64_t b = 0; b < n; ++b) {
      const float* gy = grad_out.data() + (b * c + ci) * plane;
      const float* xh = xhat_.data() + (b * c + ci) * plane;
      float* d = dx.data() + (b * c + ci) * plane;
      for (int64_t i = 0; i < plane; ++i)
        d[i] = scale * (gy[i] - mean_gy - xh[i] * mean_gy_xh);
    }
  }
  return dx;
}

void BatchNorm2d::visit(const std::string& prefix,
                        std::vector<ParamRef>* params,
                        std::vector<BufferRef>* buffers) {
  if (params) {
    params->push_back({prefix + "weight", &gamma_, &ggamma_});
    params->push_back({prefix + "bias", &beta_, &gbeta_});
  }
  if (buffers) {
    buffers->push_back({prefix + "running_mean", &running_mean_});
    buffers->push_back({prefix + "running_var", &running_var_});
  }
}

// ----------------------------------------------------------------- ReLU

Tensor ReLU::forward(const Tensor& x, bool /*training*/, Rng* /*rng*/) {
  Tensor out(x.shape());
  mask_.assign(size_t(x.numel()), 0);
  for (int64_t i = 0; i < x.numel(); ++i) {
    if (x[i] > 0.0f) {
      out[i] = x[i];
      mask_[size_t(i)] = 1;
    }
  }
  return out;
}

Tensor ReLU::backward(const Tensor& grad_out) {
  Tensor dx(grad_out.shape());
  for (int64_t i = 0; i < grad_out.numel(); ++i)
    dx[i] = mask_[size_t(i)] ? grad_out[i] : 0.0f;
  return dx;
}

// -------------------------------------------------------------- MaxPool2d

MaxPool2d::MaxPool2d(int kernel, int stride, int pad)
    : k_(kernel), stride_(stride), pad_(pad) {}

Tensor MaxPool2d::forward(const Tensor& x, bool /*training*/, Rng* /*rng*/) {
  check_nchw(x, "MaxPool2d");
  const int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int oh = static_cast<int>((h + 2 * pad_ - k_) / stride_ + 1);
  const int ow = static_cast<int>((w + 2 * pad_ - k_) / stride_ + 1);
  x_shape_ = x.shape();
  Tensor out({n, c, oh, ow});
  argmax_.assign(size_t(out.numel()), 0);

  int64_t oi = 0;
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t ci = 0; ci < c; ++ci) {
      const float* plane = x.data() + (b * c + ci) * h * w;
      const int64_t base = (b * c + ci) * h * w;
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox, ++oi) {
          float best = -std::numeric_limits<float>::infinity();
          int64_t best_idx = -1;
          for (int ky = 0; ky < k_; ++ky) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= h) continue;
            for (int kx = 0; kx < k_; ++kx) {
              const int ix = ox * stride_ - pad_ + kx;
              if (ix < 0 || ix >= w) continue;
              const float v = plane[int64_t(iy) * w + ix];
              if (v > best) {
                best = v;
                best_idx = base + int64_t(iy) * w + ix;
              }
            }
          }
          out[oi] = best;
          argmax_[size_t(oi)] = best_idx;
        }
      }
    }
  }
  return out;
}

Tensor MaxPool2d::backward(const Tensor& grad_out) {
  Tensor dx(x_shape_);
  for (int64_t i = 0; i < grad_out.numel(); ++i)
    dx[argmax_[size_t(i)]] += grad_out[i];
  return dx;
}

// ---------------------------------------------------------- GlobalAvgPool

Tensor GlobalAvgPool::forward(const Tensor& x, bool /*training*/,
                              Rng* /*rng*/) {
  check_nchw(x, "GlobalAvgPool");
  const int64_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  x_shape_ = x.shape();
  Tensor out({n, c});
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t ci = 0; ci < c; ++ci) {
      const float* p = x.data() + (b * c + ci) * plane;
      double sum = 0.0;
      for (int64_t i = 0; i < plane; ++i) sum += p[i];
      out[b * c + ci] = static_cast<float>(sum / double(plane));
    }
  }
  return out;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out) {
  const int64_t n = x_shape_[0], c = x_shape_[1],
                plane = x_shape_[2] * x_shape_[3];
  Tensor dx(x_shape_);
  for (int64_t b = 0; b < n; ++b)
    for (int64_t ci = 0; ci < c; ++ci) {
      const float g = grad_out[b * c + ci] / float(plane);
      float* d = dx.data() + (b * c + ci) * plane;
      for (int64_t i = 0; i < plane; ++i) d[i] = g;
    }
  return dx;
}

// ---------------------------------------------------------------- Flatten

Tensor Flatten::forward(const Tensor& x, bool /*training*/, Rng* /*rng*/) {
  check_nchw(x, "Flatten");
  x_shape_ = x.shape();
  return x.reshaped({x.dim(0), x.numel() / x.dim(0)});
}

Tensor Flatten::backward(const Tensor& grad_out) {
  return grad_out.reshaped(x_shape_);
}

// ----------------------------------------------------------------- Linear

Linear::Linear(int in_features, int out_features, float init_std)
    : in_f_(in_features),
      out_f_(out_features),
      init_std_(init_std),
      w_({out_features, in_features}),
      gw_({out_features, in_features}),
      b_({out_features}),
      gb_({out_features}) {}

void Linear::init_params(Rng& rng) {
  std::normal_distribution<double> dist(0.0, double(init_std_));
  for (int64_t i = 0; i < w_.numel(); ++i)
    w_[i] = static_cast<float>(dist(rng));
  for (int64_t i = 0; i < b_.numel(); ++i) b_[i] = 0.0f;
}

Tensor Linear::forward(const Tensor& x, bool /*training*/, Rng* /*rng*/) {
  if (x.ndim() != 2 || x.dim(1) != in_f_)
    throw ShapeMismatch("Linear: expected (N," + std::to_string(in_f_) +
                        "), got " + x.shape_str());
  x_ = x;
  const int64_t n = x.dim(0);
  Tensor out({n, out_f_});
  CMapMat xm(x.data(), n, in_f_);
  CMapMat wm(w_.data(), out_f_, in_f_);
  MapMat ym(out.data(), n, out_f_);
  ym.noalias() = xm * wm.transpose();
  for (int64_t b = 0; b < n; ++b)
    for (int o = 0; o < out_f_; ++o) out[b * out_f_ + o] += b_[o];
  return out;
}

Tensor Linear::backward(const Tensor& grad_out) {
  const int64_t n = x_.dim(0);
  CMapMat gy(grad_out.data(), n, out_f_);
  CMapMat xm(x_.data(), n, in_f_);
  MapMat gw(gw_.data(), out_f_, in_f_);
  gw.noalias() += gy.transpose() * xm;
  for (int o = 0; o < out_f_; ++o) gb_[o] += gy.col(o).sum();

  Tensor dx({n, in_f_});
  CMapMat wm(w_.data(), out_f_, in_f_);
  MapMat dxm(dx.data(), n, in_f_);
  dxm.noalias() = gy * wm;
  return dx;
}

void Linear::visit(const std::string& prefix, std::vector<ParamRef>* params,
                   std::vector<BufferRef>* /*buffers*/) {
  if (params) {
    params->push_back({prefix + "weight", &w_, &gw_});
    params->push_back({prefix + "bias", &b_, &gb_});
  }
}

// ---------------------------------------------------------------- Dropout

Tensor Dropout::forward(const Tensor& x, bool training, Rng* rng) {
  if (!training || p_ <= 0.0) {
    mask_.clear();
    return x;
  }
  if (!rng) throw Error("Dropout: training forward needs an rng");
  const float keep_scale = 1.0f / float(1.0 - p_);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  mask_.assign(size_t(x.numel()), 0.0f);
  Tensor out(x.shape());
  for (int64_t i = 0; i < x.numel(); ++i) {
    if (u(*rng) >= p_) {
      mask_[size_t(i)] = keep_scale;
      out[i] = x[i] * keep_scale;
    }
  }
  return out;
}

Tensor Dropout::backward(const Tensor& grad_out) {
  if (mask_.empty()) return grad_out;  // eval-mode pass-through
  Tensor dx(grad_out.shape());
  for (int64_t i = 0; i < grad_out.numel(); ++i)
    dx[i] = grad_out[i] * mask_[size_t(i)];
  return dx;
}

// ------------------------------------------------------------- Sequential

Tensor Sequential::forward(const Tensor& x, bool training, Rng* rng) {
  Tensor cur = x;
  for (auto& [_, layer] : children_) cur = layer->forward(cur, training, rng);
  return cur;
}

Tensor Sequential::backward(const Tensor& grad_out) {
  Tensor cur = grad_out;
  for (auto it = children_.rbegin(); it != children_.rend(); ++it)
    cur = it->second->backward(cur);
  return cur;
}

void Sequential::visit(const std::string& prefix,
                       std::vector<ParamRef>* params,
                       std::vector<BufferRef>* buffers) {
  for (auto& [name, layer] : children_)
    layer->visit(prefix + name + ".", params, buffers);
}

void Sequential::init_params(Rng& rng) {
  for (auto& [_, layer] : children_) layer->init_params(rng);
}

void Sequential::clear_cache() {
  for (auto& [_, layer] : children_) layer->clear_cache();
}

Layer* Sequential::child(const std::string& name) {
  for (auto& [n, layer] : children_)
    if (n == name) return layer.get();
  return nullptr;
}

// ------------------------------------------------------------- Bottleneck

Bottleneck::Bottleneck(int in_c, int width, int stride)
    : conv1_(in_c, width, 1, 1, 0),
      conv2_(width, width, 3, stride, 1),
      conv3_(width, width * kExpansion, 1, 1, 0),
      bn1_(width),
      bn2_(width),
      bn3_(width * kExpansion),
      has_down_(stride != 1 || in_c != width * kExpansion) {
  if (has_down_) {
    down_conv_ = std::make_unique<Conv2d>(in_c, width * kExpansion, 1, stride, 0);
    down_bn_ = std::make_unique<BatchNorm2d>(width * kExpansion);
  }
}

Tensor Bottleneck::forward(const Tensor& x, bool training, Rng* rng) {
  Tensor h = relu1_.forward(bn1_.forward(conv1_.forward(x, training, rng),
                                         training, rng),
                            training, rng);
  h = relu2_.forward(bn2_.forward(conv2_.forward(h, training, rng), training,
                                  rng),
                     training, rng);
  h = bn3_.forward(conv3_.forward(h, training, rng), training, rng);

  Tensor identity =
      has_down_ ? down_bn_->forward(down_conv_->forward(x, training, rng),
                                    training, rng)
                : x;
  if (!h.same_shape(identity))
    throw ShapeMismatch("Bottleneck: branch shapes disagree");
  for (int64_t i = 0; i < h.numel(); ++i) h[i] += identity[i];
  return relu3_.forward(h, training, rng);
}

Tensor Bottleneck::backward(const Tensor& grad_out) {
  Tensor g = relu3_.backward(grad_out);
  Tensor g_main = bn3_.backward(g);
  g_main = conv3_.backward(g_main);
  g_main = relu2_.backward(g_main);
  g_main = bn2_.backward(g_main);
  g_main = conv2_.backward(g_main);
  g_main = relu1_.backward(g_main);
  g_main = bn1_.backward(g_main);
  g_main = conv1_.backward(g_main);

  Tensor g_skip =
      has_down_ ? down_conv_->backward(down_bn_->backward(g)) : g;
  for (int64_t i = 0; i < g_main.numel(); ++i) g_main[i] += g_skip[i];
  return g_main;
}

void Bottleneck::visit(const std::string& prefix,
                       std::vector<ParamRef>* params,
                       std::vector<BufferRef>* buffers) {
  conv1_.visit(prefix + "conv1.", params, buffers);
  bn1_.visit(prefix + "bn1.", params, buffers);
  conv2_.visit(prefix + "conv2.", params, buffers);
  bn2_.visit(prefix + "bn2.", params, buffers);
  conv3_.visit(prefix + "conv3.", params, buffers);
  bn3_.visit(prefix + "bn3.", params, buffers);
  if (has_down_) {
    down_conv_->visit(prefix + "downsample.0.", params, buffers);
    down_bn_->visit(prefix + "downsample.1.", params, buffers);
  }
}

void Bottleneck::init_params(Rng& rng) {
  conv1_.init_params(rng);
  bn1_.init_params(rng);
  conv2_.init_params(rng);
  bn2_.init_params(rng);
  conv3_.init_params(rng);
  bn3_.init_params(rng);
  if (has_down_) {
    down_conv_->init_params(rng);
    down_bn_->init_params(rng);
  }
}

void Bottleneck::clear_cache() {
  conv1_.clear_cache();
  conv2_.clear_cache();
  conv3_.clear_cache();
  bn1_.clear_cache();
  bn2_.clear_cache();
  bn3_.clear_cache();
  relu1_.clear_cache();
  relu2_.clear_cache();
  relu3_.clear_cache();
  if (has_down_) {
    down_conv_->clear_cache();
    down_bn_->clear_cache();
  }
}

// ------------------------------------------------------------------- Adam

Adam::Adam(std::vector<ParamRef> params, double beta1, double beta2,
           double eps)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params_) {
    m_.emplace_back(p.value->shape());
    v_.emplace_back(p.value->shape());
  }
}

void Adam::zero_grad() {
  for (auto& p : params_)
    std::fill_n(p.grad->data(), p.grad->numel(), 0.0f);
}

void Adam::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, double(t_));
  const double bc2 = 1.0 - std::pow(beta2_, double(t_));
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    float* w = params_[pi].value->data();
    const float* g = params_[pi].grad->data();
    float* m = m_[pi].data();
    float* v = v_[pi].data();
    const int64_t n = params_[pi].value->numel();
    for (int64_t i = 0; i < n; ++i) {
      m[i] = float(beta1_ * m[i] + (1.0 - beta1_) * g[i]);
      v[i] = float(beta2_ * v[i] + (1.0 - beta2_) * double(g[i]) * g[i]);
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= float(lr * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

// ------------------------------------------------------------------ loss

double bce_with_logits(const Tensor& logits, std::span<const float> targets,
                       Tensor* grad) {
  const int64_t n = logits.numel();
  if (n != static_cast<int64_t>(targets.size()))
    throw ShapeMismatch("bce_with_logits: size mismatch");
  if (grad && !grad->same_shape(logits)) *grad = Tensor(logits.shape());
  double loss = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double z = logits[i];
    const double y = targets[size_t(i)];
    loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    if (grad) {
      const double sig = 1.0 / (1.0 + std::exp(-z));
      (*grad)[i] = float((sig - y) / double(n));
    }
  }
  return loss / double(n);
}

double binary_accuracy(std::span<const float> logits,
                       std::span<const int> labels) {
  if (logits.empty() || logits.size() != labels.size())
    throw ShapeMismatch("binary_accuracy: size mismatch");
  int64_t correct = 0;
  for (size_t i = 0; i < logits.size(); ++i)
    correct += (logits[i] > 0.0f ? 1 : 0) == labels[i];
  return double(correct) / double(logits.size());
}

bool all_finite(const Tensor& t) {
  for (int64_t i = 0; i < t.numel(); ++i)
    if (!std::isfinite(t[i])) return false;
  return true;
}

}  // namespace gdl::nn
