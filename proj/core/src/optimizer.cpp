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

#include "fbseg/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "fbseg/errors.hpp"

namespace fbseg {

double poly_learning_rate(double base_lr, int epoch, int max_epochs, double exponent) {
  if (max_epochs <= 0) throw ConfigError("max_epochs must be positive");
  if (epoch >= max_epochs) return 0.0;
  const double progress = static_cast<double>(std::max(epoch, 0)) / max_epochs;
  return base_lr * std::pow(1.0 - progress, exponent);
}

NesterovSgd::NesterovSgd(const nn::ParameterSet& params, double momentum, double max_grad_norm)
    : momentum_(momentum), max_grad_norm_(max_grad_norm), velocity_(params.zeros_like()) {
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
}

double NesterovSgd::step(nn::ParameterSet& params, nn::Gradients& grads, double lr) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double v : g.values()) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  const double clip = (max_grad_norm_ > 0.0 && norm > max_grad_norm_) ? max_grad_norm_ / norm : 1.0;

  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params[i].value.data();
    double* v = velocity_[i].data();
    const double* g = grads[i].data();
    for (std::size_t k = 0; k < grads[i].size(); ++k) {
      const double gk = g[k] * clip;
      v[k] = momentum_ * v[k] + gk;
      p[k] -= lr * (gk + momentum_ * v[k]);
    }
  }
  return norm;
}

void zero_gradients(nn::Gradients& grads) {
  for (auto& g : grads) g.fill(0.0);
}

}  // namespace fbseg
