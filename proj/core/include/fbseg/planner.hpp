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

#include <array>
#include <string>
#include <vector>

namespace fbseg {

using Extent2 = std::array<int, 2>;

inline constexpr int kDefaultMaxDepth = 6;
inline constexpr int kBaseFeatures = 32;
inline constexpr int kFeatureCap = 512;
inline constexpr int kMinBottleneckExtent = 4;

// Network configuration derived from the training patch size.
struct NetPlan {
  Extent2 patch_size{0, 0};
  int depth = 0;
  // One entry per downsampling stage.
  std::vector<Extent2> strides;
  // One entry per encoder level (input level plus each downsampling stage).
  std::vector<Extent2> kernels;
  // Channel width per encoder level, depth + 1 entries.
  std::vector<int> features;
  int feature_cap = kFeatureCap;
  int deep_supervision_heads = 0;
  std::string norm = "instance";
  std::string nonlinearity = "leaky_relu";
  double negative_slope = 0.01;

  // Product of strides per axis.
  Extent2 total_stride() const;
  // Feature-map extent after the last downsampling stage.
  Extent2 bottleneck() const;

  friend bool operator==(const NetPlan&, const NetPlan&) = default;
};

// Heuristic planning: per axis, the number of halvings k is the largest k with
// axis / 2^k an integer >= 4; depth = min(k_h, k_w, max_depth). Strides are 2
// and kernels 3 everywhere, widths start at 32 and double up to 512, and
// there are max(depth - 2, 0) deep-supervision heads.
//
// Throws ConfigError if an axis is < 8 or odd.
NetPlan plan_network(Extent2 patch_size, int max_depth = kDefaultMaxDepth);

// Throws ConfigError naming the first violated invariant ("depth",
// "strides length", "kernels length", "features length", "features
// nondecreasing", "feature cap", "deep supervision heads", "minimum
// feature-map size", ...).
void validate_plan(const NetPlan& plan);

std::string plan_to_json(const NetPlan& plan);
NetPlan plan_from_json(const std::string& text);

// Parses "448x512".
Extent2 parse_extent2(const std::string& text);

}  // namespace fbseg
