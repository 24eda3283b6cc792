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
#include <span>
#include <vector>

#include "fbseg/tensor.hpp"

namespace fbseg {

// Integer class labels for a batch of 2D slices, (B,H,W) row-major.
struct LabelMap {
  std::size_t n = 0;
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<std::uint8_t> labels;

  LabelMap() = default;
  LabelMap(std::size_t n_, std::size_t h_, std::size_t w_)
      : n(n_), h(h_), w(w_), labels(n_ * h_ * w_, 0) {}

  std::uint8_t& operator()(std::size_t b, std::size_t y, std::size_t x) noexcept {
    return labels[(b * h + y) * w + x];
  }
  std::uint8_t operator()(std::size_t b, std::size_t y, std::size_t x) const noexcept {
    return labels[(b * h + y) * w + x];
  }
  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

struct LossWeights {
  double dice = 1.0;
  double cross_entropy = 1.0;

  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

inline constexpr double kDiceSmooth = 1e-5;

// Channel softmax of (B,2,H,W) logits.
Tensor softmax(const Tensor& logits);

// 1 - (2 sum(p1 g) + eps) / (sum p1 + sum g + eps), summed over the whole
// batch, p1 the foreground probability and g the foreground indicator.
// Throws ValidationError on shape mismatch.
double dice_loss(const Tensor& probs, const LabelMap& target);

// Mean pixelwise negative log-likelihood of the true class, computed from
// logits with a stable log-sum-exp.
double cross_entropy(const Tensor& logits, const LabelMap& target);

// Nearest-neighbour downsampling by an integer factor: output (y, x) takes the
// label at (factor*y, factor*x).
LabelMap downsample_nearest(const LabelMap& target, std::size_t factor);

// Head weights 1, 1/2, 1/4, ... normalized to sum to one.
std::vector<double> deep_supervision_weights(std::size_t outputs);

struct LossResult {
  double value = 0.0;
  // dL/dlogits for every head, same shapes as the inputs.
  std::vector<Tensor> grads;
};

// Weighted Dice + cross-entropy over all heads. The first head is full
// resolution; later heads are scored against the nearest-neighbour
// downsampled target. If head_weights is empty, deep_supervision_weights()
// is used.
LossResult combined_loss(const std::vector<Tensor>& logits, const LabelMap& target,
                         const LossWeights& weights, std::span<const double> head_weights = {});

}  // namespace fbseg
