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
#include <vector>

#include "fbseg/planner.hpp"
#include "fbseg/volume.hpp"

namespace fbseg {

// Row-major 2D plane. Row index follows the stack's first axis, column the
// second.
template <typename T>
struct Plane {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> values;

  Plane() = default;
  Plane(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), values(r * c, fill) {}

  T& operator()(std::size_t r, std::size_t c) noexcept { return values[r * cols + c]; }
  T operator()(std::size_t r, std::size_t c) const noexcept { return values[r * cols + c]; }
  friend bool operator==(const Plane&, const Plane&) = default;
};

using Image2D = Plane<double>;
using LabelImage = Plane<std::uint8_t>;

inline constexpr double kNormalizeEpsilon = 1e-8;

Image2D extract_slice(const Stack& stack, std::size_t slice);
LabelImage extract_slice(const Mask& mask, std::size_t slice);

// (x - mean) / (std + 1e-8) with population statistics over the whole slice.
Image2D normalize(const Image2D& slice);

// Offsets used to centre an extent of `size` inside `target`: when padding,
// the source lands at dst_offset; when cropping, reading starts at
// src_offset. Both are floor((larger - smaller) / 2).
struct CenterWindow {
  std::size_t src_offset = 0;
  std::size_t dst_offset = 0;
  std::size_t length = 0;
};
CenterWindow center_window(std::size_t size, std::size_t target);

// Centre-pads with `fill` or centre-crops to the target extent.
template <typename T>
Plane<T> center_fit(const Plane<T>& in, Extent2 target, T fill = T{}) {
  const auto rw = center_window(in.rows, static_cast<std::size_t>(target[0]));
  const auto cw = center_window(in.cols, static_cast<std::size_t>(target[1]));
  Plane<T> out(static_cast<std::size_t>(target[0]), static_cast<std::size_t>(target[1]), fill);
  for (std::size_t r = 0; r < rw.length; ++r) {
    for (std::size_t c = 0; c < cw.length; ++c) {
      out(rw.dst_offset + r, cw.dst_offset + c) = in(rw.src_offset + r, cw.src_offset + c);
    }
  }
  return out;
}

struct Patch {
  Image2D image;
  LabelImage label;
  std::size_t slice = 0;
};

// Draws a slice uniformly; with probability 0.5 redraws up to 10 times until
// the slice has foreground. The slice is normalized, then centre-padded with
// zeros or centre-cropped to patch_size; the label follows identically.
Patch sample_patch(const Stack& stack, const Mask& mask, Extent2 patch_size,
                   std::mt19937_64& rng);

struct AugmentRanges {
  double max_rotation_degrees = 15.0;
  double min_scale = 0.9;
  double max_scale = 1.1;
  double min_intensity = 0.9;
  double max_intensity = 1.1;
};

// Random flips, rotation, isotropic scaling about the patch centre and a
// multiplicative intensity change. Image is resampled bilinearly (zero
// outside), labels by nearest neighbour.
void augment(Patch& patch, std::mt19937_64& rng, const AugmentRanges& ranges = {});

}  // namespace fbseg
