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

#include "fbseg/phantom.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace fbseg {
namespace {

struct Ellipsoid {
  double centre[3];
  double radius[3];

  bool contains(double r, double c, double s) const {
    const double dr = (r - centre[0]) / radius[0];
    const double dc = (c - centre[1]) / radius[1];
    const double ds = (s - centre[2]) / radius[2];
    return dr * dr + dc * dc + ds * ds <= 1.0;
  }
};

LabeledStack make_one(const PhantomSpec& spec, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed),
                    static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const double extent[3] = {static_cast<double>(spec.shape.h), static_cast<double>(spec.shape.w),
                            static_cast<double>(spec.shape.s)};

  // Radii as fractions of the half-extent in [0.5, 0.8] keep the ellipsoid
  // volume at pi/6 * product, i.e. between ~6.5% and ~27% of the box.
  Ellipsoid brain{};
  for (int a = 0; a < 3; ++a) {
    const double half = extent[a] / 2.0;
    brain.radius[a] = uniform(0.5, 0.8) * half;
    const double slack = std::max(0.0, half - brain.radius[a] - 0.5);
    brain.centre[a] = (extent[a] - 1.0) / 2.0 + uniform(-slack, slack) * 0.5;
  }

  // The body is an in-plane ellipse extruded through all slices, larger than
  // the brain and displaced so that one side of the brain touches background.
  const double angle = uniform(0.0, 2.0 * std::numbers::pi);
  double body_centre[2];
  double body_radius[2];
  for (int a = 0; a < 2; ++a) {
    body_radius[a] = brain.radius[a] * uniform(1.25, 1.6);
    const double shift = brain.radius[a] * uniform(0.35, 0.6);
    body_centre[a] = brain.centre[a] + shift * (a == 0 ? std::cos(angle) : std::sin(angle));
  }

  LabeledStack out;
  out.stack.voxels = Volume<float>(spec.shape, 0.0f);
  out.stack.spacing = spec.spacing;
  out.stack.centre = spec.centre;
  char name[32];
  std::snprintf(name, sizeof(name), "phantom_%03zu", index);
  out.stack.identifier = name;
  out.mask.voxels = Volume<std::uint8_t>(spec.shape, 0);
  out.mask.spacing = spec.spacing;

  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t s = 0; s < spec.shape.s; ++s) {
    for (std::size_t c = 0; c < spec.shape.w; ++c) {
      for (std::size_t r = 0; r < spec.shape.h; ++r) {
        const double dr = (r - body_centre[0]) / body_radius[0];
        const double dc = (c - body_centre[1]) / body_radius[1];
        float value = 0.0f;
        if (dr * dr + dc * dc <= 1.0) value = kPhantomBodyIntensity;
        if (brain.contains(static_cast<double>(r), static_cast<double>(c),
                           static_cast<double>(s))) {
          value = kPhantomBrainIntensity;
          out.mask.voxels(r, c, s) = 1;
        }
        if (spec.noise_level > 0.0) {
          value += static_cast<float>(spec.noise_level * noise(rng));
        }
        out.stack.voxels(r, c, s) = value;
      }
    }
  }
  return out;
}

}  // namespace

void validate_phantom_spec(const PhantomSpec& spec) {
  if (spec.count < 1) throw ConfigError("phantom count must be at least 1");
  if (spec.shape.h < kMinPhantomInPlane || spec.shape.w < kMinPhantomInPlane ||
      spec.shape.s < kMinPhantomSlices) {
    throw ConfigError("phantom shape " + to_string(spec.shape) +
                      " is too small (in-plane axes >= 16, slices >= 4)");
  }
  if (!(spec.noise_level >= 0.0) || !std::isfinite(spec.noise_level)) {
    throw ConfigError("noise_level must be a nonnegative finite number");
  }
  for (double s : spec.spacing) {
    if (!(s > 0.0)) throw ConfigError("phantom spacing must be positive");
  }
}

std::vector<LabeledStack> generate_phantoms(const PhantomSpec& spec) {
  validate_phantom_spec(spec);
  std::vector<LabeledStack> out;
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) out.push_back(make_one(spec, i));
  return out;
}

}  // namespace fbseg
