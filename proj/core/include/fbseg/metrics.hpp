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

#include <cstddef>
#include <cstdint>
#include <span>

#include "fbseg/volume.hpp"

namespace fbseg {

// Stacks scoring strictly below this Dice are counted as outliers.
inline constexpr double kOutlierThreshold = 0.9;

struct DiceScore {
  double value = 1.0;
  std::size_t pred_voxels = 0;
  std::size_t gt_voxels = 0;
  std::size_t intersection = 0;
};

// 2|P∩G| / (|P| + |G|) over the whole volume; 1.0 when both are empty.
// Throws ValidationError for mismatched shapes.
DiceScore dice_3d(const Volume<std::uint8_t>& pred, const Volume<std::uint8_t>& gt);
DiceScore dice_3d(const Mask& pred, const Mask& gt);

// Number of scores strictly below threshold.
std::size_t count_outliers(std::span<const double> scores, double threshold = kOutlierThreshold);

struct ScoreSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
  std::size_t outliers = 0;

  friend bool operator==(const ScoreSummary&, const ScoreSummary&) = default;
};

// Linear interpolation between order statistics at position q * (n - 1).
// `sorted` must be ascending and nonempty.
double quantile_sorted(std::span<const double> sorted, double q);

// Five-number summary, mean, count and outlier count. Throws ValidationError
// for an empty input.
ScoreSummary summarize(std::span<const double> scores, double outlier_threshold = kOutlierThreshold);

}  // namespace fbseg
