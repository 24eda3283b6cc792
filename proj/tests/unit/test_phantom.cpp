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

#include <gtest/gtest.h>

#include "fbseg/errors.hpp"
#include "fbseg/phantom.hpp"
#include "oracles.hpp"

namespace fbseg {
namespace {

TEST(Phantom, SameSpecIsBitIdentical) {
  PhantomSpec spec;
  spec.seed = 7;
  const auto a = generate_phantoms(spec);
  const auto b = generate_phantoms(spec);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].stack.voxels, b[0].stack.voxels);
  EXPECT_EQ(a[0].mask.voxels, b[0].mask.voxels);
  EXPECT_EQ(a[0].stack.identifier, b[0].stack.identifier);
}

TEST(Phantom, DifferentSeedsDiffer) {
  PhantomSpec spec;
  spec.seed = 7;
  const auto a = generate_phantoms(spec);
  spec.seed = 8;
  const auto b = generate_phantoms(spec);
  EXPECT_NE(a[0].mask.voxels, b[0].mask.voxels);
}

TEST(Phantom, NoiselessBrainIsBrighterThanOutside) {
  PhantomSpec spec;
  spec.count = 5;
  spec.noise_level = 0.0;
  for (const auto& pair : generate_phantoms(spec)) {
    double in = 0, out = 0;
    std::size_t n_in = 0, n_out = 0;
    const auto& v = pair.stack.voxels.values();
    const auto& m = pair.mask.voxels.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (m[i]) {
        in += v[i];
        ++n_in;
      } else {
        out += v[i];
        ++n_out;
      }
    }
    ASSERT_GT(n_in, 0u);
    ASSERT_GT(n_out, 0u);
    EXPECT_GT(in / n_in, out / n_out);
  }
}

TEST(Phantom, TwentyPairsContract) {
  PhantomSpec spec;
  spec.count = 20;
  const auto pairs = generate_phantoms(spec);
  ASSERT_EQ(pairs.size(), 20u);
  for (const auto& p : pairs) {
    EXPECT_EQ(p.stack.shape(), (Shape3{64, 64, 10}));
    EXPECT_EQ(p.mask.shape(), p.stack.shape());
    EXPECT_GT(p.mask.count(), 0u);
    EXPECT_NO_THROW(validate_stack(p.stack));
    EXPECT_NO_THROW(validate_mask(p.mask, p.stack));
  }
}

TEST(Phantom, BrainOccupiesFiveToThirtyPercent) {
  PhantomSpec spec;
  spec.count = 30;
  spec.seed = 3;
  for (const auto& p : generate_phantoms(spec)) {
    const double fraction = static_cast<double>(p.mask.count()) / p.mask.voxels.size();
    EXPECT_GE(fraction, 0.05);
    EXPECT_LE(fraction, 0.30);
  }
}

TEST(Phantom, MasksAreSingleComponents) {
  PhantomSpec spec;
  spec.count = 10;
  spec.shape = {48, 40, 8};
  for (const auto& p : generate_phantoms(spec)) {
    EXPECT_EQ(testing::count_components(p.mask.voxels, 26), 1u);
    EXPECT_EQ(testing::count_components(p.mask.voxels, 6), 1u);
  }
}

TEST(Phantom, BodyPartiallySurroundsBrain) {
  PhantomSpec spec;
  spec.count = 5;
  spec.noise_level = 0.0;
  for (const auto& p : generate_phantoms(spec)) {
    std::size_t body = 0;
    for (float v : p.stack.voxels.values()) body += v == kPhantomBodyIntensity;
    EXPECT_GT(body, 0u);
  }
}

TEST(Phantom, InvalidSpecsAreRejected) {
  PhantomSpec spec;
  spec.count = 0;
  EXPECT_THROW(generate_phantoms(spec), ConfigError);
  spec = {};
  spec.shape = {8, 64, 10};
  EXPECT_THROW(generate_phantoms(spec), ConfigError);
  spec = {};
  spec.shape = {64, 64, 2};
  EXPECT_THROW(generate_phantoms(spec), ConfigError);
  spec = {};
  spec.noise_level = -1.0;
  EXPECT_THROW(generate_phantoms(spec), ConfigError);
}

}  // namespace
}  // namespace fbseg
