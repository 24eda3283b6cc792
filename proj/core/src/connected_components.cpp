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

#include "fbseg/connected_components.hpp"

#include <array>
#include <cstdlib>

namespace fbseg {
namespace {

struct Offset {
  int dr;
  int dc;
  int ds;
};

std::vector<Offset> neighbourhood(Connectivity connectivity) {
  std::vector<Offset> out;
  for (int ds = -1; ds <= 1; ++ds) {
    for (int dc = -1; dc <= 1; ++dc) {
      for (int dr = -1; dr <= 1; ++dr) {
        const int manhattan = std::abs(dr) + std::abs(dc) + std::abs(ds);
        if (manhattan == 0) continue;
        if (connectivity == Connectivity::kFace && manhattan != 1) continue;
        out.push_back({dr, dc, ds});
      }
    }
  }
  return out;
}

}  // namespace

Connectivity connectivity_from_int(int neighbours) {
  if (neighbours == 6) return Connectivity::kFace;
  if (neighbours == 26) return Connectivity::kFull;
  throw ConfigError("connectivity must be 6 or 26, got " + std::to_string(neighbours));
}

ComponentLabels label_components(const Volume<std::uint8_t>& mask, Connectivity connectivity) {
  const Shape3& shape = mask.shape();
  ComponentLabels out;
  out.labels = Volume<std::uint32_t>(shape, 0);
  const auto offsets = neighbourhood(connectivity);
  const long h = static_cast<long>(shape.h);
  const long w = static_cast<long>(shape.w);
  const long s = static_cast<long>(shape.s);

  std::vector<std::size_t> queue;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask.data()[start] || out.labels.data()[start]) continue;
    const auto label = static_cast<std::uint32_t>(out.sizes.size() + 1);
    std::size_t size = 0;
    queue.clear();
    queue.push_back(start);
    out.labels.data()[start] = label;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t idx = queue[head];
      ++size;
      const long r = static_cast<long>(idx % shape.h);
      const long c = static_cast<long>((idx / shape.h) % shape.w);
      const long z = static_cast<long>(idx / (shape.h * shape.w));
      for (const Offset& o : offsets) {
        const long nr = r + o.dr;
        const long nc = c + o.dc;
        const long nz = z + o.ds;
        if (nr < 0 || nc < 0 || nz < 0 || nr >= h || nc >= w || nz >= s) continue;
        const std::size_t n = static_cast<std::size_t>(nr + h * (nc + w * nz));
        if (mask.data()[n] && !out.labels.data()[n]) {
          out.labels.data()[n] = label;
          queue.push_back(n);
        }
      }
    }
    out.sizes.push_back(size);
  }
  return out;
}

Volume<std::uint8_t> keep_largest_cc(const Volume<std::uint8_t>& mask, Connectivity connectivity) {
  const ComponentLabels cc = label_components(mask, connectivity);
  Volume<std::uint8_t> out(mask.shape(), 0);
  if (cc.sizes.empty()) return out;
  std::size_t best = 0;
  for (std::size_t k = 1; k < cc.sizes.size(); ++k) {
    if (cc.sizes[k] > cc.sizes[best]) best = k;
  }
  const auto keep = static_cast<std::uint32_t>(best + 1);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = cc.labels.data()[i] == keep;
  return out;
}

Mask keep_largest_cc(const Mask& mask, Connectivity connectivity) {
  return Mask{keep_largest_cc(mask.voxels, connectivity), mask.spacing};
}

}  // namespace fbseg
