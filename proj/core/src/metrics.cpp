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

#include "fbseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fbseg {

DiceScore dice_3d(const Volume<std::uint8_t>& pred, const Volume<std::uint8_t>& gt) {
  if (pred.shape() != gt.shape()) {
    throw ValidationError("dice_3d: prediction " + to_string(pred.shape()) +
                          " and ground truth " + to_string(gt.shape()) + " differ in shape");
  }
  DiceScore score;
  const std::uint8_t* p = pred.data();
  const std::uint8_t* g = gt.data();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool pi = p[i] != 0;
    const bool gi = g[i] != 0;
    score.pred_voxels += pi;
    score.gt_voxels += gi;
    score.intersection += pi && gi;
  }
  const std::size_t denom = score.pred_voxels + score.gt_voxels;
  score.value = denom == 0 ? 1.0
                           : 2.0 * static_cast<double>(score.intersection) /
                                 static_cast<double>(denom);
  return score;
}

DiceScore dice_3d(const Mask& pred, const Mask& gt) { return dice_3d(pred.voxels, gt.voxels); }

std::size_t count_outliers(std::span<const double> scores, double threshold) {
  return static_cast<std::size_t>(
      std::count_if(scores.begin(), scores.end(), [&](double s) { return s < threshold; }));
}

double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ScoreSummary summarize(std::span<const double> scores, double outlier_threshold) {
  if (scores.empty()) throw ValidationError("cannot summarize an empty score list");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());

  ScoreSummary s;
  s.count = sorted.size();
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  double total = 0.0;
  for (double v : scores) total += v;
  s.mean = total / static_cast<double>(s.count);
  s.outliers = count_outliers(scores, outlier_threshold);
  return s;
}

}  // namespace fbseg
