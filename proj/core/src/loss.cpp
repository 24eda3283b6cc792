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

#include "fbseg/loss.hpp"

#include <cmath>

#include "fbseg/errors.hpp"

namespace fbseg {
namespace {

void check_pair(const Tensor& t, const LabelMap& target, const char* what) {
  if (t.c() != 2 || t.n() != target.n || t.h() != target.h || t.w() != target.w ||
      target.labels.size() != target.n * target.h * target.w) {
    throw ValidationError(std::string(what) + ": tensor " + to_string(t.shape()) +
                          " does not match target (" + std::to_string(target.n) + "," +
                          std::to_string(target.h) + "," + std::to_string(target.w) + ")");
  }
}

struct DiceTerms {
  double intersection = 0.0;
  double predicted = 0.0;
  double truth = 0.0;

  double loss() const {
    return 1.0 - (2.0 * intersection + kDiceSmooth) / (predicted + truth + kDiceSmooth);
  }
};

DiceTerms dice_terms(const Tensor& probs, const LabelMap& target) {
  DiceTerms t;
  const std::size_t plane = probs.plane_size();
  for (std::size_t n = 0; n < probs.n(); ++n) {
    const double* p1 = probs.plane(n, 1);
    const std::uint8_t* g = target.labels.data() + n * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      const double gi = g[i] ? 1.0 : 0.0;
      t.intersection += p1[i] * gi;
      t.predicted += p1[i];
      t.truth += gi;
    }
  }
  return t;
}

// Single head: returns the loss and writes dL/dlogits scaled by head weight.
double head_loss(const Tensor& logits, const LabelMap& target, const LossWeights& weights,
                 double head_weight, Tensor& grad) {
  const Tensor probs = softmax(logits);
  const std::size_t plane = logits.plane_size();
  const double pixels = static_cast<double>(logits.n() * plane);

  const DiceTerms terms = dice_terms(probs, target);
  const double denom = terms.predicted + terms.truth + kDiceSmooth;
  const double numer = 2.0 * terms.intersection + kDiceSmooth;
  const double dice = 1.0 - numer / denom;
  const double ce = cross_entropy(logits, target);

  grad = Tensor(logits.shape());
  for (std::size_t n = 0; n < logits.n(); ++n) {
    const double* p0 = probs.plane(n, 0);
    const double* p1 = probs.plane(n, 1);
    const std::uint8_t* g = target.labels.data() + n * plane;
    double* d0 = grad.plane(n, 0);
    double* d1 = grad.plane(n, 1);
    for (std::size_t i = 0; i < plane; ++i) {
      const double gi = g[i] ? 1.0 : 0.0;
      // d(dice)/d(p1), then through the two-class softmax.
      const double d_p1 = -(2.0 * gi * denom - numer) / (denom * denom);
      const double dice_z1 = d_p1 * p1[i] * p0[i];
      // d(ce)/dz_k = (p_k - y_k) / pixels.
      const double ce_z1 = (p1[i] - gi) / pixels;
      const double ce_z0 = (p0[i] - (1.0 - gi)) / pixels;
      d1[i] = head_weight * (weights.dice * dice_z1 + weights.cross_entropy * ce_z1);
      d0[i] = head_weight * (weights.dice * -dice_z1 + weights.cross_entropy * ce_z0);
    }
  }
  return weights.dice * dice + weights.cross_entropy * ce;
}

}  // namespace

Tensor softmax(const Tensor& logits) {
  if (logits.c() != 2) throw ValidationError("softmax expects 2 class channels");
  Tensor probs(logits.shape());
  const std::size_t plane = logits.plane_size();
  for (std::size_t n = 0; n < logits.n(); ++n) {
    const double* z0 = logits.plane(n, 0);
    const double* z1 = logits.plane(n, 1);
    double* p0 = probs.plane(n, 0);
    double* p1 = probs.plane(n, 1);
    for (std::size_t i = 0; i < plane; ++i) {
      const double m = std::max(z0[i], z1[i]);
      const double e0 = std::exp(z0[i] - m);
      const double e1 = std::exp(z1[i] - m);
      const double s = e0 + e1;
      p0[i] = e0 / s;
      p1[i] = e1 / s;
    }
  }
  return probs;
}

double dice_loss(const Tensor& probs, const LabelMap& target) {
  check_pair(probs, target, "dice_loss");
  return dice_terms(probs, target).loss();
}

double cross_entropy(const Tensor& logits, const LabelMap& target) {
  check_pair(logits, target, "cross_entropy");
  const std::size_t plane = logits.plane_size();
  double total = 0.0;
  for (std::size_t n = 0; n < logits.n(); ++n) {
    const double* z0 = logits.plane(n, 0);
    const double* z1 = logits.plane(n, 1);
    const std::uint8_t* g = target.labels.data() + n * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      const double m = std::max(z0[i], z1[i]);
      const double lse = m + std::log(std::exp(z0[i] - m) + std::exp(z1[i] - m));
      total += lse - (g[i] ? z1[i] : z0[i]);
    }
  }
  return total / static_cast<double>(logits.n() * plane);
}

LabelMap downsample_nearest(const LabelMap& target, std::size_t factor) {
  if (factor == 0 || target.h % factor != 0 || target.w % factor != 0) {
    throw ValidationError("cannot downsample labels by " + std::to_string(factor));
  }
  LabelMap out(target.n, target.h / factor, target.w / factor);
  for (std::size_t n = 0; n < out.n; ++n) {
    for (std::size_t y = 0; y < out.h; ++y) {
      for (std::size_t x = 0; x < out.w; ++x) out(n, y, x) = target(n, y * factor, x * factor);
    }
  }
  return out;
}

std::vector<double> deep_supervision_weights(std::size_t outputs) {
  std::vector<double> w(outputs);
  double total = 0.0;
  for (std::size_t i = 0; i < outputs; ++i) {
    w[i] = std::ldexp(1.0, -static_cast<int>(i));
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

LossResult combined_loss(const std::vector<Tensor>& logits, const LabelMap& target,
                         const LossWeights& weights, std::span<const double> head_weights) {
  if (logits.empty()) throw ValidationError("combined_loss needs at least one output");
  if (weights.dice < 0.0 || weights.cross_entropy < 0.0 ||
      weights.dice + weights.cross_entropy <= 0.0) {
    throw ConfigError("loss weights must be nonnegative with a positive sum");
  }
  std::vector<double> default_weights;
  if (head_weights.empty()) {
    default_weights = deep_supervision_weights(logits.size());
    head_weights = default_weights;
  }
  if (head_weights.size() != logits.size()) {
    throw ValidationError("one head weight per output is required");
  }

  LossResult result;
  result.grads.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const Tensor& z = logits[i];
    if (z.h() == 0 || target.h % z.h() != 0 || target.w % z.w() != 0 ||
        target.h / z.h() != target.w / z.w()) {
      throw ValidationError("output " + std::to_string(i) + " " + to_string(z.shape()) +
                            " is not an integer downsampling of the target");
    }
    const std::size_t factor = target.h / z.h();
    const LabelMap scaled = factor == 1 ? target : downsample_nearest(target, factor);
    check_pair(z, scaled, "combined_loss");
    result.value += head_weights[i] * head_loss(z, scaled, weights, head_weights[i], result.grads[i]);
  }
  return result;
}

}  // namespace fbseg
