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

#include "fbseg/volume.hpp"

#include <algorithm>
#include <cmath>

namespace fbseg {

std::string to_string(const Shape3& shape) {
  return std::to_string(shape.h) + "x" + std::to_string(shape.w) + "x" +
         std::to_string(shape.s);
}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(voxels.values().begin(), voxels.values().end(),
                    [](std::uint8_t v) { return v != 0; }));
}

void validate_stack(const Stack& stack) {
  const Shape3& shape = stack.shape();
  if (shape.h < 1 || shape.w < 1 || shape.s < 1) {
    throw ValidationError("stack '" + stack.identifier + "' has an empty axis (" +
                          to_string(shape) + ")");
  }
  for (double s : stack.spacing) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ValidationError("stack '" + stack.identifier +
                            "' has non-positive voxel spacing");
    }
  }
  const auto& v = stack.voxels.values();
  if (std::any_of(v.begin(), v.end(), [](float x) { return !std::isfinite(x); })) {
    throw ValidationError("stack '" + stack.identifier + "' contains non-finite intensities");
  }
}

void validate_mask(const Mask& mask) {
  const auto& v = mask.voxels.values();
  if (std::any_of(v.begin(), v.end(), [](std::uint8_t x) { return x > 1; })) {
    throw ValidationError("mask contains labels other than 0 and 1");
  }
}

void validate_mask(const Mask& mask, const Stack& reference) {
  if (mask.shape() != reference.shape()) {
    throw ValidationError("mask shape " + to_string(mask.shape()) +
                          " does not match stack shape " + to_string(reference.shape()));
  }
  validate_mask(mask);
}

}  // namespace fbseg
