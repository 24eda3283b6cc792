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
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace fbseg::detail {

using Rgb = std::array<std::uint8_t, 3>;

// Minimal RGB raster for report figures.
class Canvas {
 public:
  Canvas(int width, int height, Rgb background);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  void set(int x, int y, Rgb color);
  void fill_rect(int x0, int y0, int x1, int y1, Rgb color);
  void rect(int x0, int y0, int x1, int y1, Rgb color);
  void hline(int x0, int x1, int y, Rgb color, int dash = 0);
  void vline(int x, int y0, int y1, Rgb color);
  void circle(int cx, int cy, int radius, Rgb color);
  // 3x5 bitmap glyphs for digits, '.', '-', scaled by `scale`.
  void text(int x, int y, std::string_view s, Rgb color, int scale = 2);

  void write_png(const std::filesystem::path& path) const;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

}  // namespace fbseg::detail
