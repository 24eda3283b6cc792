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
#include <new>
#include <string>
#include <vector>

namespace fbseg {

// Fixed 64-byte alignment keeps vectorized reductions reproducible: Eigen
// peels a data-dependent prefix for unaligned pointers, which changes the
// summation order from one allocation to the next.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlignment));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <typename U>
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept {
    return true;
  }
};

using AlignedBuffer = std::vector<double, AlignedAllocator<double>>;

// Dense NCHW tensor of doubles. The network runs entirely in 64-bit.
class Tensor {
 public:
  using Shape = std::array<std::size_t, 4>;

  Tensor() = default;
  Tensor(std::size_t n, std::size_t c, std::size_t h, std::size_t w, double fill = 0.0)
      : shape_{n, c, h, w}, data_(n * c * h * w, fill) {}
  explicit Tensor(const Shape& shape, double fill = 0.0)
      : Tensor(shape[0], shape[1], shape[2], shape[3], fill) {}

  std::size_t n() const noexcept { return shape_[0]; }
  std::size_t c() const noexcept { return shape_[1]; }
  std::size_t h() const noexcept { return shape_[2]; }
  std::size_t w() const noexcept { return shape_[3]; }
  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t plane_size() const noexcept { return shape_[2] * shape_[3]; }

  double& operator()(std::size_t n, std::size_t c, std::size_t y, std::size_t x) noexcept {
    return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
  }
  double operator()(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  // Pointer to channel plane (n, c).
  double* plane(std::size_t n, std::size_t c) noexcept {
    return data_.data() + (n * shape_[1] + c) * plane_size();
  }
  const double* plane(std::size_t n, std::size_t c) const noexcept {
    return data_.data() + (n * shape_[1] + c) * plane_size();
  }
  AlignedBuffer& values() noexcept { return data_; }
  const AlignedBuffer& values() const noexcept { return data_; }

  void fill(double v);
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_{0, 0, 0, 0};
  AlignedBuffer data_;
};

std::string to_string(const Tensor::Shape& shape);

// Concatenates along the channel axis. Batch and spatial extents must match.
Tensor concat_channels(const Tensor& a, const Tensor& b);

}  // namespace fbseg
