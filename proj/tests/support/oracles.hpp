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

// Independent reference implementations used to check the library. These are
// deliberately naive and share no code with fbseg.

#include <array>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <vector>

#include "fbseg/volume.hpp"

namespace fbseg::testing {

struct DiceCounts {
  std::size_t pred = 0;
  std::size_t gt = 0;
  std::size_t intersection = 0;
  double value = 1.0;
};

// Triple loop over (r, c, s).
inline DiceCounts brute_force_dice(const Volume<std::uint8_t>& pred,
                                   const Volume<std::uint8_t>& gt) {
  DiceCounts d;
  const Shape3 s = pred.shape();
  for (std::size_t r = 0; r < s.h; ++r) {
    for (std::size_t c = 0; c < s.w; ++c) {
      for (std::size_t k = 0; k < s.s; ++k) {
        const bool p = pred(r, c, k) != 0;
        const bool g = gt(r, c, k) != 0;
        d.pred += p;
        d.gt += g;
        d.intersection += p && g;
      }
    }
  }
  const std::size_t denom = d.pred + d.gt;
  d.value = denom == 0 ? 1.0 : 2.0 * static_cast<double>(d.intersection) / static_cast<double>(denom);
  return d;
}

// Flood fill with an explicit stack. Voxel coordinates follow the NIfTI
// convention: x is the first (row) axis, y the second, z the slice axis.
// Components are discovered in lexicographic (z, y, x) order; the largest wins
// and ties go to the one found first.
inline Volume<std::uint8_t> flood_fill_largest(const Volume<std::uint8_t>& mask, int connectivity) {
  const Shape3 s = mask.shape();
  Volume<int> comp(s, -1);
  std::vector<std::size_t> sizes;
  auto neighbour = [&](int dz, int dy, int dx) {
    const int manhattan = std::abs(dz) + std::abs(dy) + std::abs(dx);
    if (manhattan == 0) return false;
    return connectivity == 26 || manhattan == 1;
  };
  for (std::size_t z = 0; z < s.s; ++z) {
    for (std::size_t y = 0; y < s.w; ++y) {
      for (std::size_t x = 0; x < s.h; ++x) {
        if (!mask(x, y, z) || comp(x, y, z) >= 0) continue;
        const int id = static_cast<int>(sizes.size());
        std::size_t size = 0;
        std::vector<std::array<long, 3>> todo{{static_cast<long>(z), static_cast<long>(y),
                                               static_cast<long>(x)}};
        comp(x, y, z) = id;
        while (!todo.empty()) {
          const auto [cz, cy, cx] = todo.back();
          todo.pop_back();
          ++size;
          for (int dz = -1; dz <= 1; ++dz) {
            for (int dy = -1; dy <= 1; ++dy) {
              for (int dx = -1; dx <= 1; ++dx) {
                if (!neighbour(dz, dy, dx)) continue;
                const long nz = cz + dz, ny = cy + dy, nx = cx + dx;
                if (nz < 0 || ny < 0 || nx < 0 || nz >= static_cast<long>(s.s) ||
                    ny >= static_cast<long>(s.w) || nx >= static_cast<long>(s.h)) {
                  continue;
                }
                if (!mask(nx, ny, nz) || comp(nx, ny, nz) >= 0) continue;
                comp(nx, ny, nz) = id;
                todo.push_back({nz, ny, nx});
              }
            }
          }
        }
        sizes.push_back(size);
      }
    }
  }
  Volume<std::uint8_t> out(s, 0);
  if (sizes.empty()) return out;
  int best = 0;
  for (int i = 1; i < static_cast<int>(sizes.size()); ++i) {
    if (sizes[i] > sizes[best]) best = i;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = comp.values()[i] == best;
  return out;
}

inline std::size_t count_components(const Volume<std::uint8_t>& mask, int connectivity) {
  // Peel off largest components until nothing is left.
  Volume<std::uint8_t> rest = mask;
  std::size_t n = 0;
  while (true) {
    const auto largest = flood_fill_largest(rest, connectivity);
    bool any = false;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (largest.values()[i]) {
        rest.values()[i] = 0;
        any = true;
      }
    }
    if (!any) return n;
    ++n;
  }
}

inline Volume<std::uint8_t> random_mask(Shape3 shape, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution on(density);
  Volume<std::uint8_t> v(shape, 0);
  for (auto& x : v.values()) x = on(rng) ? 1 : 0;
  return v;
}

// Closed-form parameter count of the UNet for encoder widths f[0..D] with
// `heads` deep-supervision outputs (3x3 kernels, no conv bias, affine
// instance norm, 2x2 transposed upsampling, 1x1 output convs with bias).
inline std::size_t unet_parameter_count(const std::vector<int>& f, int heads) {
  const std::size_t depth = f.size() - 1;
  std::size_t total = 0;
  for (std::size_t l = 0; l <= depth; ++l) {
    const std::size_t in = l == 0 ? 1 : static_cast<std::size_t>(f[l - 1]);
    const std::size_t out = static_cast<std::size_t>(f[l]);
    total += 9 * in * out + 2 * out;   // first conv + norm
    total += 9 * out * out + 2 * out;  // second conv + norm
  }
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t lo = static_cast<std::size_t>(f[l]);
    const std::size_t hi = static_cast<std::size_t>(f[l + 1]);
    total += 4 * hi * lo;                // transposed conv
    total += 9 * 2 * lo * lo + 2 * lo;   // block on concatenation
    total += 9 * lo * lo + 2 * lo;       // second block
  }
  total += static_cast<std::size_t>(f[0]) * 2 + 2;
  for (int h = 1; h <= heads; ++h) total += static_cast<std::size_t>(f[h]) * 2 + 2;
  return total;
}

}  // namespace fbseg::testing
