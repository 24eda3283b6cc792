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

#include "fbseg/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "fbseg/errors.hpp"

namespace fbseg {

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string to_string(const Tensor::Shape& shape) {
  return "(" + std::to_string(shape[0]) + "," + std::to_string(shape[1]) + "," +
         std::to_string(shape[2]) + "," + std::to_string(shape[3]) + ")";
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w()) {
    throw ValidationError("cannot concatenate " + to_string(a.shape()) + " and " +
                          to_string(b.shape()));
  }
  Tensor out(a.n(), a.c() + b.c(), a.h(), a.w());
  const std::size_t plane = a.plane_size();
  for (std::size_t n = 0; n < a.n(); ++n) {
    std::copy_n(a.plane(n, 0), a.c() * plane, out.plane(n, 0));
    std::copy_n(b.plane(n, 0), b.c() * plane, out.plane(n, a.c()));
  }
  return out;
}

}  // namespace fbseg
