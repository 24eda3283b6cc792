// Copyright 2026 The fbseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fbseg/layers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

#include "fbseg/errors.hpp"

namespace fbseg::nn {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using Index = Eigen::Index;

int conv_out_extent(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

// Unfolds one sample (channels x h x w) into a (channels*k*k) x (oh*ow)
// matrix of receptive fields; out-of-bounds taps read zero.
void im2col(const double* x, int channels, int h, int w, int kernel, int stride, int pad,
            int oh, int ow, double* col) {
  const int cols = oh * ow;
  for (int c = 0; c < channels; ++c) {
    const double* plane = x + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        double* row = col + (static_cast<std::size_t>(c) * kernel * kernel + ky * kernel + kx) *
                                static_cast<std::size_t>(cols);
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          double* dst = row + static_cast<std::size_t>(oy) * ow;
          if (iy < 0 || iy >= h) {
            std::fill_n(dst, ow, 0.0);
            continue;
          }
          const double* src = plane + static_cast<std::size_t>(iy) * w;
          if (stride == 1) {
            const int shift = kx - pad;
            const int lo = std::max(0, -shift);
            const int hi = std::min(ow, w - shift);
            std::fill_n(dst, std::max(lo, 0), 0.0);
            if (hi > lo) std::copy(src + lo + shift, src + hi + shift, dst + lo);
            if (hi < ow) std::fill(dst + std::max(hi, lo), dst + ow, 0.0);
          } else {
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride - pad + kx;
              dst[ox] = (ix >= 0 && ix < w) ? src[ix] : 0.0;
            }
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters-and-adds receptive-field gradients back.
void col2im(const double* col, int channels, int h, int w, int kernel, int stride, int pad,
            int oh, int ow, double* x) {
  const int cols = oh * ow;
  for (int c = 0; c < channels; ++c) {
    double* plane = x + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const double* row = col + (static_cast<std::size_t>(c) * kernel * kernel +
                                   ky * kernel + kx) *
                                      static_cast<std::size_t>(cols);
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          const double* src = row + static_cast<std::size_t>(oy) * ow;
          double* dst = plane + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

void kaiming_normal(Tensor& t, std::size_t fan_in, double gain, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, gain / std::sqrt(static_cast<double>(fan_in)));
  for (double& v : t.values()) v = dist(rng);
}

double leaky_gain(double slope) { return std::sqrt(2.0 / (1.0 + slope * slope)); }

}  // namespace

std::size_t ParameterSet::add(std::string name, Tensor::Shape shape) {
  params_.push_back(Parameter{std::move(name), Tensor(shape)});
  return params_.size() - 1;
}

std::size_t ParameterSet::scalar_count() const noexcept {
  std::size_t total = 0;
  for (const auto& p : params_) total += p.value.size();
  return total;
}

std::vector<Tensor> ParameterSet::zeros_like() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.emplace_back(p.value.shape());
  return out;
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(ParameterSet& params, const std::string& name, int in_channels, int out_channels,
               int kernel, int stride, bool bias)
    : in_(in_channels),
      out_(out_channels),
      kernel_(kernel),
      stride_(stride),
      pad_(kernel / 2),
      has_bias_(bias) {
  weight_ = params.add(name + ".weight",
                       {static_cast<std::size_t>(out_), static_cast<std::size_t>(in_),
                        static_cast<std::size_t>(kernel_), static_cast<std::size_t>(kernel_)});
  if (has_bias_) bias_ = params.add(name + ".bias", {1, static_cast<std::size_t>(out_), 1, 1});
}

void Conv2d::initialize(ParameterSet& params, std::mt19937_64& rng, double gain) const {
  kaiming_normal(params[weight_].value, static_cast<std::size_t>(in_) * kernel_ * kernel_, gain,
                 rng);
  if (has_bias_) params[bias_].value.fill(0.0);
}

Tensor Conv2d::forward(const ParameterSet& params, const Tensor& x) const {
  if (static_cast<int>(x.c()) != in_) {
    throw ValidationError("conv expects " + std::to_string(in_) + " channels, got " +
                          to_string(x.shape()));
  }
  const int h = static_cast<int>(x.h());
  const int w = static_cast<int>(x.w());
  const int oh = conv_out_extent(h, kernel_, stride_, pad_);
  const int ow = conv_out_extent(w, kernel_, stride_, pad_);
  Tensor y(x.n(), static_cast<std::size_t>(out_), static_cast<std::size_t>(oh),
           static_cast<std::size_t>(ow));

  const Index k = static_cast<Index>(in_) * kernel_ * kernel_;
  const Index cols = static_cast<Index>(oh) * ow;
  ConstMatrixMap weight(params[weight_].value.data(), out_, k);
  const bool pointwise = kernel_ == 1 && stride_ == 1;
  AlignedBuffer col(pointwise ? 0 : static_cast<std::size_t>(k * cols));

  for (std::size_t n = 0; n < x.n(); ++n) {
    const double* src = x.plane(n, 0);
    if (!pointwise) {
      im2col(src, in_, h, w, kernel_, stride_, pad_, oh, ow, col.data());
      src = col.data();
    }
    MatrixMap out(y.plane(n, 0), out_, cols);
    out.noalias() = weight * ConstMatrixMap(src, k, cols);
    if (has_bias_) {
      const double* b = params[bias_].value.data();
      for (int c = 0; c < out_; ++c) out.row(c).array() += b[c];
    }
  }
  return y;
}

Tensor Conv2d::backward(const ParameterSet& params, const Tensor& x, const Tensor& grad_out,
                        Gradients& grads, bool want_input_grad) const {
  const int h = static_cast<int>(x.h());
  const int w = static_cast<int>(x.w());
  const int oh = static_cast<int>(grad_out.h());
  const int ow = static_cast<int>(grad_out.w());
  const Index k = static_cast<Index>(in_) * kernel_ * kernel_;
  const Index cols = static_cast<Index>(oh) * ow;

  ConstMatrixMap weight(params[weight_].value.data(), out_, k);
  MatrixMap grad_weight(grads[weight_].data(), out_, k);
  const bool pointwise = kernel_ == 1 && stride_ == 1;
  AlignedBuffer col(pointwise ? 0 : static_cast<std::size_t>(k * cols));
  AlignedBuffer grad_col(pointwise ? 0 : static_cast<std::size_t>(k * cols));

  Tensor grad_in;
  if (want_input_grad) grad_in = Tensor(x.shape());

  for (std::size_t n = 0; n < x.n(); ++n) {
    ConstMatrixMap g(grad_out.plane(n, 0), out_, cols);
    const double* src = x.plane(n, 0);
    if (!pointwise) {
      im2col(src, in_, h, w, kernel_, stride_, pad_, oh, ow, col.data());
      src = col.data();
    }
    grad_weight.noalias() += g * ConstMatrixMap(src, k, cols).transpose();
    if (has_bias_) {
      double* gb = grads[bias_].data();
      for (int c = 0; c < out_; ++c) gb[c] += g.row(c).sum();
    }
    if (want_input_grad) {
      if (pointwise) {
        MatrixMap(grad_in.plane(n, 0), k, cols).noalias() = weight.transpose() * g;
      } else {
        MatrixMap(grad_col.data(), k, cols).noalias() = weight.transpose() * g;
        col2im(grad_col.data(), in_, h, w, kernel_, stride_, pad_, oh, ow, grad_in.plane(n, 0));
      }
    }
  }
  return grad_in;
}

// ------------------------------------------------------ ConvTranspose2x2

ConvTranspose2x2::ConvTranspose2x2(ParameterSet& params, const std::string& name,
                                   int in_channels, int out_channels)
    : in_(in_channels), out_(out_channels) {
  weight_ = params.add(name + ".weight", {static_cast<std::size_t>(in_),
                                          static_cast<std::size_t>(out_), 2, 2});
}

void ConvTranspose2x2::initialize(ParameterSet& params, std::mt19937_64& rng,
                                  double gain) const {
  // Each output pixel sees exactly one input pixel per input channel.
  kaiming_normal(params[weight_].value, static_cast<std::size_t>(in_), gain, rng);
}

Tensor ConvTranspose2x2::forward(const ParameterSet& params, const Tensor& x) const {
  if (static_cast<int>(x.c()) != in_) {
    throw ValidationError("transposed conv expects " + std::to_string(in_) + " channels, got " +
                          to_string(x.shape()));
  }
  const std::size_t h = x.h();
  const std::size_t w = x.w();
  const Index hw = static_cast<Index>(h * w);
  Tensor y(x.n(), static_cast<std::size_t>(out_), 2 * h, 2 * w);
  ConstMatrixMap weight(params[weight_].value.data(), in_, static_cast<Index>(out_) * 4);
  RowMatrix taps(static_cast<Index>(out_) * 4, hw);

  for (std::size_t n = 0; n < x.n(); ++n) {
    taps.noalias() = weight.transpose() * ConstMatrixMap(x.plane(n, 0), in_, hw);
    for (int co = 0; co < out_; ++co) {
      double* dst = y.plane(n, static_cast<std::size_t>(co));
      for (int t = 0; t < 4; ++t) {
        const double* src = taps.data() + (static_cast<Index>(co) * 4 + t) * hw;
        const std::size_t dy = static_cast<std::size_t>(t / 2);
        const std::size_t dx = static_cast<std::size_t>(t % 2);
        for (std::size_t yy = 0; yy < h; ++yy) {
          double* row = dst + (2 * yy + dy) * (2 * w) + dx;
          const double* s = src + yy * w;
          for (std::size_t xx = 0; xx < w; ++xx) row[2 * xx] = s[xx];
        }
      }
    }
  }
  return y;
}

Tensor ConvTranspose2x2::backward(const ParameterSet& params, const Tensor& x,
                                  const Tensor& grad_out, Gradients& grads) const {
  const std::size_t h = x.h();
  const std::size_t w = x.w();
  const Index hw = static_cast<Index>(h * w);
  ConstMatrixMap weight(params[weight_].value.data(), in_, static_cast<Index>(out_) * 4);
  MatrixMap grad_weight(grads[weight_].data(), in_, static_cast<Index>(out_) * 4);
  RowMatrix taps(static_cast<Index>(out_) * 4, hw);
  Tensor grad_in(x.shape());

  for (std::size_t n = 0; n < x.n(); ++n) {
    for (int co = 0; co < out_; ++co) {
      const double* src = grad_out.plane(n, static_cast<std::size_t>(co));
      for (int t = 0; t < 4; ++t) {
        double* dst = taps.data() + (static_cast<Index>(co) * 4 + t) * hw;
        const std::size_t dy = static_cast<std::size_t>(t / 2);
        const std::size_t dx = static_cast<std::size_t>(t % 2);
        for (std::size_t yy = 0; yy < h; ++yy) {
          const double* row = src + (2 * yy + dy) * (2 * w) + dx;
          double* d = dst + yy * w;
          for (std::size_t xx = 0; xx < w; ++xx) d[xx] = row[2 * xx];
        }
      }
    }
    ConstMatrixMap input(x.plane(n, 0), in_, hw);
    grad_weight.noalias() += input * taps.transpose();
    MatrixMap(grad_in.plane(n, 0), in_, hw).noalias() = weight * taps;
  }
  return grad_in;
}

// ----------------------------------------------------------- InstanceNorm

InstanceNorm::InstanceNorm(ParameterSet& params, const std::string& name, int channels)
    : channels_(channels) {
  gamma_ = params.add(name + ".weight", {1, static_cast<std::size_t>(channels), 1, 1});
  beta_ = params.add(name + ".bias", {1, static_cast<std::size_t>(channels), 1, 1});
}

void InstanceNorm::initialize(ParameterSet& params) const {
  params[gamma_].value.fill(1.0);
  params[beta_].value.fill(0.0);
}

Tensor InstanceNorm::forward(const ParameterSet& params, const Tensor& x, Cache* cache) const {
  const std::size_t plane = x.plane_size();
  const double* gamma = params[gamma_].value.data();
  const double* beta = params[beta_].value.data();
  Tensor y(x.shape());
  if (cache) {
    cache->normalized = Tensor(x.shape());
    cache->inv_std.assign(x.n() * x.c(), 0.0);
  }
  for (std::size_t n = 0; n < x.n(); ++n) {
    for (std::size_t c = 0; c < x.c(); ++c) {
      const double* src = x.plane(n, c);
      double mean = 0.0;
      for (std::size_t i = 0; i < plane; ++i) mean += src[i];
      mean /= static_cast<double>(plane);
      double var = 0.0;
      for (std::size_t i = 0; i < plane; ++i) var += (src[i] - mean) * (src[i] - mean);
      var /= static_cast<double>(plane);
      const double inv_std = 1.0 / std::sqrt(var + kEpsilon);
      double* dst = y.plane(n, c);
      double* xhat = cache ? cache->normalized.plane(n, c) : nullptr;
      for (std::size_t i = 0; i < plane; ++i) {
        const double v = (src[i] - mean) * inv_std;
        if (xhat) xhat[i] = v;
        dst[i] = gamma[c] * v + beta[c];
      }
      if (cache) cache->inv_std[n * x.c() + c] = inv_std;
    }
  }
  return y;
}

Tensor InstanceNorm::backward(const ParameterSet& params, const Cache& cache,
                              const Tensor& grad_out, Gradients& grads) const {
  const Tensor& xhat = cache.normalized;
  const std::size_t plane = xhat.plane_size();
  const double count = static_cast<double>(plane);
  const double* gamma = params[gamma_].value.data();
  double* grad_gamma = grads[gamma_].data();
  double* grad_beta = grads[beta_].data();
  Tensor grad_in(xhat.shape());
  for (std::size_t n = 0; n < xhat.n(); ++n) {
    for (std::size_t c = 0; c < xhat.c(); ++c) {
      const double* g = grad_out.plane(n, c);
      const double* xh = xhat.plane(n, c);
      double sum_g = 0.0;
      double sum_gx = 0.0;
      for (std::size_t i = 0; i < plane; ++i) {
        sum_g += g[i];
        sum_gx += g[i] * xh[i];
      }
      grad_gamma[c] += sum_gx;
      grad_beta[c] += sum_g;
      const double scale = gamma[c] * cache.inv_std[n * xhat.c() + c] / count;
      double* dst = grad_in.plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) {
        dst[i] = scale * (count * g[i] - sum_g - xh[i] * sum_gx);
      }
    }
  }
  return grad_in;
}

// ------------------------------------------------------------- activations

void leaky_relu_inplace(Tensor& x, double slope) {
  for (double& v : x.values()) {
    if (v < 0.0) v *= slope;
  }
}

void leaky_relu_backward_inplace(const Tensor& pre_activation, Tensor& grad, double slope) {
  const double* pre = pre_activation.data();
  double* g = grad.data();
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (pre[i] < 0.0) g[i] *= slope;
  }
}

// --------------------------------------------------------------- ConvBlock

ConvBlock::ConvBlock(ParameterSet& params, const std::string& name, int in_channels,
                     int out_channels, int kernel, int stride, double slope)
    : conv_(params, name + ".conv", in_channels, out_channels, kernel, stride, false),
      norm_(params, name + ".norm", out_channels),
      slope_(slope) {}

void ConvBlock::initialize(ParameterSet& params, std::mt19937_64& rng) const {
  conv_.initialize(params, rng, leaky_gain(slope_));
  norm_.initialize(params);
}

Tensor ConvBlock::forward(const ParameterSet& params, const Tensor& x, Cache* cache) const {
  Tensor y = norm_.forward(params, conv_.forward(params, x), cache ? &cache->norm : nullptr);
  if (cache) {
    cache->input = x;
    cache->pre_activation = y;
  }
  leaky_relu_inplace(y, slope_);
  return y;
}

Tensor ConvBlock::backward(const ParameterSet& params, const Cache& cache, const Tensor& grad_out,
                           Gradients& grads, bool want_input_grad) const {
  Tensor g = grad_out;
  leaky_relu_backward_inplace(cache.pre_activation, g, slope_);
  Tensor g_conv = norm_.backward(params, cache.norm, g, grads);
  return conv_.backward(params, cache.input, g_conv, grads, want_input_grad);
}

}  // namespace fbseg::nn
