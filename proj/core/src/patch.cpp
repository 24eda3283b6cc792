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

#include "fbseg/patch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fbseg {

Image2D extract_slice(const Stack& stack, std::size_t slice) {
  const Shape3& s = stack.shape();
  Image2D out(s.h, s.w);
  for (std::size_t r = 0; r < s.h; ++r) {
    for (std::size_t c = 0; c < s.w; ++c) out(r, c) = stack.voxels(r, c, slice);
  }
  return out;
}

LabelImage extract_slice(const Mask& mask, std::size_t slice) {
  const Shape3& s = mask.shape();
  LabelImage out(s.h, s.w);
  for (std::size_t r = 0; r < s.h; ++r) {
    for (std::size_t c = 0; c < s.w; ++c) out(r, c) = mask.voxels(r, c, slice);
  }
  return out;
}

Image2D normalize(const Image2D& slice) {
  Image2D out = slice;
  if (slice.values.empty()) return out;
  const double count = static_cast<double>(slice.values.size());
  double mean = 0.0;
  for (double v : slice.values) mean += v;
  mean /= count;
  double var = 0.0;
  for (double v : slice.values) var += (v - mean) * (v - mean);
  const double denom = std::sqrt(var / count) + kNormalizeEpsilon;
  for (double& v : out.values) v = (v - mean) / denom;
  return out;
}

CenterWindow center_window(std::size_t size, std::size_t target) {
  if (size <= target) return {0, (target - size) / 2, size};
  return {(size - target) / 2, 0, target};
}

Patch sample_patch(const Stack& stack, const Mask& mask, Extent2 patch_size,
                   std::mt19937_64& rng) {
  const Shape3& shape = stack.shape();
  std::uniform_int_distribution<std::size_t> pick(0, shape.s - 1);
  std::bernoulli_distribution biased(0.5);

  auto has_foreground = [&](std::size_t s) {
    for (std::size_t c = 0; c < shape.w; ++c) {
      for (std::size_t r = 0; r < shape.h; ++r) {
        if (mask.voxels(r, c, s)) return true;
      }
    }
    return false;
  };

  std::size_t slice = pick(rng);
  if (biased(rng)) {
    for (int attempt = 0; attempt < 10 && !has_foreground(slice); ++attempt) slice = pick(rng);
  }

  Patch patch;
  patch.slice = slice;
  patch.image = center_fit(normalize(extract_slice(stack, slice)), patch_size, 0.0);
  patch.label = center_fit(extract_slice(mask, slice), patch_size, std::uint8_t{0});
  return patch;
}

void augment(Patch& patch, std::mt19937_64& rng, const AugmentRanges& ranges) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const bool flip_rows = unit(rng) < 0.5;
  const bool flip_cols = unit(rng) < 0.5;
  const double angle = uniform(-ranges.max_rotation_degrees, ranges.max_rotation_degrees) *
                       std::numbers::pi / 180.0;
  const double scale = uniform(ranges.min_scale, ranges.max_scale);
  const double intensity = uniform(ranges.min_intensity, ranges.max_intensity);

  const std::size_t rows = patch.image.rows;
  const std::size_t cols = patch.image.cols;
  const double cr = (static_cast<double>(rows) - 1.0) / 2.0;
  const double cc = (static_cast<double>(cols) - 1.0) / 2.0;
  const double cos_a = std::cos(angle);
  const double sin_a = std::sin(angle);

  Image2D image(rows, cols, 0.0);
  LabelImage label(rows, cols, 0);
  auto sample = [&](double r, double c) {
    const double r0 = std::floor(r);
    const double c0 = std::floor(c);
    const double fr = r - r0;
    const double fc = c - c0;
    double acc = 0.0;
    for (int dr = 0; dr < 2; ++dr) {
      for (int dc = 0; dc < 2; ++dc) {
        const double rr = r0 + dr;
        const double cc2 = c0 + dc;
        if (rr < 0 || cc2 < 0 || rr >= static_cast<double>(rows) ||
            cc2 >= static_cast<double>(cols)) {
          continue;
        }
        const double wgt = (dr ? fr : 1.0 - fr) * (dc ? fc : 1.0 - fc);
        acc += wgt * patch.image(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc2));
      }
    }
    return acc;
  };

  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double u = static_cast<double>(r) - cr;
      double v = static_cast<double>(c) - cc;
      // Inverse mapping: undo scaling and rotation, then flips.
      const double su = (cos_a * u + sin_a * v) / scale;
      const double sv = (-sin_a * u + cos_a * v) / scale;
      double sr = su + cr;
      double sc = sv + cc;
      if (flip_rows) sr = static_cast<double>(rows) - 1.0 - sr;
      if (flip_cols) sc = static_cast<double>(cols) - 1.0 - sc;
      image(r, c) = intensity * sample(sr, sc);
      const double nr = std::round(sr);
      const double nc = std::round(sc);
      if (nr >= 0 && nc >= 0 && nr < static_cast<double>(rows) && nc < static_cast<double>(cols)) {
        label(r, c) = patch.label(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc));
      }
    }
  }
  patch.image = std::move(image);
  patch.label = std::move(label);
}

}  // namespace fbseg
