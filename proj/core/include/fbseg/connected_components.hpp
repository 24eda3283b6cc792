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
#include <vector>

#include "fbseg/volume.hpp"

namespace fbseg {

enum class Connectivity { kFace = 6, kFull = 26 };

// Throws ConfigError for anything other than 6 or 26.
Connectivity connectivity_from_int(int neighbours);

struct ComponentLabels {
  // 0 = background, components numbered from 1 in order of their first voxel
  // in (slice, column, row) scan order.
  Volume<std::uint32_t> labels;
  // sizes[k] = voxel count of component k + 1.
  std::vector<std::size_t> sizes;
};

ComponentLabels label_components(const Volume<std::uint8_t>& mask, Connectivity connectivity);

// Keeps only the largest foreground component. Ties go to the component whose
// first voxel is smallest in (z, y, x) lexicographic order, i.e. the
// lowest-numbered label. Empty input gives empty output.
Volume<std::uint8_t> keep_largest_cc(const Volume<std::uint8_t>& mask,
                                     Connectivity connectivity = Connectivity::kFull);
Mask keep_largest_cc(const Mask& mask, Connectivity connectivity = Connectivity::kFull);

}  // namespace fbseg
