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

// Parameters of a synthetic dataset standing in for clinical stacks.
struct PhantomSpec {
  std::size_t count = 1;
  Shape3 shape{64, 64, 10};
  double noise_level = 0.1;
  std::uint64_t seed = 42;
  Spacing spacing{0.8, 0.8, 3.5};
  std::string centre = "SYN";
};

inline constexpr std::size_t kMinPhantomInPlane = 16;
inline constexpr std::size_t kMinPhantomSlices = 4;

// Intensity levels used by the generator.
inline constexpr float kPhantomBrainIntensity = 1.0f;
inline constexpr float kPhantomBodyIntensity = 0.45f;

// Each pair holds a bright ellipsoid ("brain", 5-30% of the volume) inside a
// darker elliptic cylinder ("body") that is shifted so it only partially
// surrounds the brain, plus additive Gaussian noise. The mask marks exactly
// the voxels whose centres fall inside the ellipsoid. Output is a pure
// function of the spec. Throws ConfigError if count < 1, an in-plane axis is < 16
// or there are fewer than 4 slices.
std::vector<LabeledStack> generate_phantoms(const PhantomSpec& spec);

void validate_phantom_spec(const PhantomSpec& spec);

}  // namespace fbseg
