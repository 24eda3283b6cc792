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

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fbseg/tensor.hpp"

namespace fbseg::nn {

struct Parameter {
  std::string name;
  Tensor value;
};

// Ordered, named parameter collection. Layers refer to their tensors by
// index, so a model and its gradients are plain parallel vectors.
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor::Shape shape);

  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const noexcept { return params_.size(); }
  std::size_t scalar_count() const noexcept;

  std::vector<Parameter>& entries() noexcept { return params_; }
  const std::vector<Parameter>& entries() const noexcept { return params_; }

  // Zero-filled tensors shaped like each parameter.
  std::vector<Tensor> zeros_like() const;

 private:
  std::vector<Parameter> params_;
};

using Gradients = std::vector<Tensor>;

// 2D convolution, square kernel, "same" padding of kernel/2 so stride 1
// preserves the extent and stride 2 halves even extents.
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParameterSet& params, const std::string& name, int in_channels, int out_channels,
         int kernel, int stride, bool bias);

  Tensor forward(const ParameterSet& params, const Tensor& x) const;
  // Accumulates weight/bias gradients; returns dL/dx unless want_input_grad
  // is false (then an empty tensor).
  Tensor backward(const ParameterSet& params, const Tensor& x, const Tensor& grad_out,
                  Gradients& grads, bool want_input_grad = true) const;

  void initialize(ParameterSet& params, std::mt19937_64& rng, double gain) const;

  int in_channels() const noexcept { return in_; }
  int out_channels() const noexcept { return out_; }

 private:
  int in_ = 0;
  int out_ = 0;
  int kernel_ = 1;
  int stride_ = 1;
  int pad_ = 0;
  bool has_bias_ = false;
  std::size_t weight_ = 0;
  std::size_t bias_ = 0;
};

// Transposed convolution with kernel 2 and stride 2 (exact 2x upsampling).
class ConvTranspose2x2 {
 public:
  ConvTranspose2x2() = default;
  ConvTranspose2x2(ParameterSet& params, const std::string& name, int in_channels,
                   int out_channels);

  Tensor forward(const ParameterSet& params, const Tensor& x) const;
  Tensor backward(const ParameterSet& params, const Tensor& x, const Tensor& grad_out,
                  Gradients& grads) const;
  void initialize(ParameterSet& params, std::mt19937_64& rng, double gain) const;

 private:
  int in_ = 0;
  int out_ = 0;
  std::size_t weight_ = 0;
};

// Per-sample, per-channel normalization over the spatial plane with a learned
// affine transform.
class InstanceNorm {
 public:
  struct Cache {
    Tensor normalized;  // x_hat before the affine transform
    std::vector<double> inv_std;
  };

  static constexpr double kEpsilon = 1e-5;

  InstanceNorm() = default;
  InstanceNorm(ParameterSet& params, const std::string& name, int channels);

  Tensor forward(const ParameterSet& params, const Tensor& x, Cache* cache) const;
  Tensor backward(const ParameterSet& params, const Cache& cache, const Tensor& grad_out,
                  Gradients& grads) const;
  void initialize(ParameterSet& params) const;

 private:
  int channels_ = 0;
  std::size_t gamma_ = 0;
  std::size_t beta_ = 0;
};

void leaky_relu_inplace(Tensor& x, double slope);
// grad *= (pre_activation > 0 ? 1 : slope)
void leaky_relu_backward_inplace(const Tensor& pre_activation, Tensor& grad, double slope);

// conv -> instance norm -> leaky ReLU.
class ConvBlock {
 public:
  struct Cache {
    Tensor input;
    InstanceNorm::Cache norm;
    Tensor pre_activation;
  };

  ConvBlock() = default;
  ConvBlock(ParameterSet& params, const std::string& name, int in_channels, int out_channels,
            int kernel, int stride, double slope);

  Tensor forward(const ParameterSet& params, const Tensor& x, Cache* cache) const;
  Tensor backward(const ParameterSet& params, const Cache& cache, const Tensor& grad_out,
                  Gradients& grads, bool want_input_grad = true) const;
  void initialize(ParameterSet& params, std::mt19937_64& rng) const;

 private:
  Conv2d conv_;
  InstanceNorm norm_;
  double slope_ = 0.01;
};

}  // namespace fbseg::nn
