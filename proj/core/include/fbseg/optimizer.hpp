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

#include <vector>

#include "fbseg/layers.hpp"

namespace fbseg {

// lr * (1 - epoch / max_epochs)^exponent, with epoch counted from 0. Returns 0
// for epoch >= max_epochs.
double poly_learning_rate(double base_lr, int epoch, int max_epochs, double exponent);

// Stochastic gradient descent with Nesterov momentum:
//   v <- momentum * v + g
//   p <- p - lr * (g + momentum * v)
class NesterovSgd {
 public:
  NesterovSgd(const nn::ParameterSet& params, double momentum, double max_grad_norm);

  // Rescales grads in place when their global L2 norm exceeds max_grad_norm
  // (disabled when max_grad_norm <= 0), then updates params. Returns the norm
  // before clipping.
  double step(nn::ParameterSet& params, nn::Gradients& grads, double lr);

 private:
  double momentum_;
  double max_grad_norm_;
  std::vector<Tensor> velocity_;
};

void zero_gradients(nn::Gradients& grads);

}  // namespace fbseg
