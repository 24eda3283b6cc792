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
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fbseg/errors.hpp"

namespace fbseg {

// Extent of a volume: rows (H), columns (W) and slices (S).
struct Shape3 {
  std::size_t h = 0;
  std::size_t w = 0;
  std::size_t s = 0;

  std::size_t voxels() const noexcept { return h * w * s; }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

std::string to_string(const Shape3& shape);

// Physical voxel size in millimetres: two in-plane values, then slice
// thickness.
using Spacing = std::array<double, 3>;

// Dense 3D array. Storage follows the NIfTI convention: the row index varies
// fastest, then the column, then the slice, so each slice is one contiguous
// block of h*w values.
template <typename T>
class Volume {
 public:
  using value_type = T;

  Volume() = default;
  explicit Volume(Shape3 shape, T fill = T{})
      : shape_(shape), data_(shape.voxels(), fill) {}

  const Shape3& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(std::size_t row, std::size_t col, std::size_t slice) const noexcept {
    return row + shape_.h * (col + shape_.w * slice);
  }
  T& operator()(std::size_t row, std::size_t col, std::size_t slice) noexcept {
    return data_[index(row, col, slice)];
  }
  const T& operator()(std::size_t row, std::size_t col, std::size_t slice) const noexcept {
    return data_[index(row, col, slice)];
  }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::vector<T>& values() noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  Shape3 shape_{};
  std::vector<T> data_;
};

// An acquired MR volume made of 2D slices.
struct Stack {
  Volume<float> voxels;
  Spacing spacing{1.0, 1.0, 1.0};
  std::string identifier;
  std::string centre;

  const Shape3& shape() const noexcept { return voxels.shape(); }
};

// Binary brain mask aligned voxel-for-voxel with a Stack.
struct Mask {
  Volume<std::uint8_t> voxels;
  Spacing spacing{1.0, 1.0, 1.0};

  const Shape3& shape() const noexcept { return voxels.shape(); }
  std::size_t count() const noexcept;
};

// A stack paired with its ground-truth mask.
struct LabeledStack {
  Stack stack;
  Mask mask;
};

// Throws ValidationError unless every axis is >= 1, spacing is positive and
// all intensities are finite.
void validate_stack(const Stack& stack);

// Throws ValidationError unless the mask holds only 0/1 and, when a reference
// is given, matches its shape.
void validate_mask(const Mask& mask);
void validate_mask(const Mask& mask, const Stack& reference);

}  // namespace fbseg
