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

#include <random>

#include "fbseg/errors.hpp"
#include "fbseg/planner.hpp"

namespace fbseg {
namespace {

// Independent statement of the halving rule: largest k with axis / 2^k an
// integer >= 4.
int halvings(int axis) {
  int k = 0;
  while (axis % 2 == 0 && axis / 2 >= 4) {
    axis /= 2;
    ++k;
  }
  return k;
}

TEST(Planner, PatchOf448x512) {
  const NetPlan plan = plan_network({448, 512});
  EXPECT_EQ(plan.depth, 6);
  EXPECT_EQ(plan.features, (std::vector<int>{32, 64, 128, 256, 512, 512, 512}));
  EXPECT_EQ(plan.bottleneck(), (Extent2{7, 8}));
  EXPECT_EQ(plan.deep_supervision_heads, 4);
  ASSERT_EQ(plan.strides.size(), 6u);
  for (const auto& s : plan.strides) EXPECT_EQ(s, (Extent2{2, 2}));
  for (const auto& k : plan.kernels) EXPECT_EQ(k, (Extent2{3, 3}));
  EXPECT_EQ(plan.norm, "instance");
  EXPECT_EQ(plan.nonlinearity, "leaky_relu");
  EXPECT_DOUBLE_EQ(plan.negative_slope, 0.01);
  EXPECT_NO_THROW(validate_plan(plan));
}

TEST(Planner, SmallestPatch) {
  const NetPlan plan = plan_network({8, 8});
  EXPECT_EQ(plan.depth, 1);
  EXPECT_EQ(plan.features, (std::vector<int>{32, 64}));
  EXPECT_EQ(plan.bottleneck(), (Extent2{4, 4}));
  EXPECT_EQ(plan.deep_supervision_heads, 0);
}

TEST(Planner, PatchOf64x64) {
  const NetPlan plan = plan_network({64, 64});
  EXPECT_EQ(plan.depth, 4);
  EXPECT_EQ(plan.features, (std::vector<int>{32, 64, 128, 256, 512}));
  EXPECT_EQ(plan.bottleneck(), (Extent2{4, 4}));
  EXPECT_EQ(plan.deep_supervision_heads, 2);
}

TEST(Planner, InadmissiblePatchesAreConfigErrors) {
  EXPECT_THROW(plan_network({6, 64}), ConfigError);
  EXPECT_THROW(plan_network({64, 63}), ConfigError);
  EXPECT_THROW(plan_network({0, 64}), ConfigError);
}

TEST(Planner, DepthCapIsConfigurable) {
  EXPECT_EQ(plan_network({448, 512}, 3).depth, 3);
  EXPECT_THROW(plan_network({64, 64}, 0), ConfigError);
}

void expect_invariant(const NetPlan& plan, const std::string& name) {
  try {
    validate_plan(plan);
    FAIL() << "expected invariant violation: " << name;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(name), std::string::npos) << e.what();
  }
}

TEST(Planner, ValidatePlanNamesViolations) {
  NetPlan plan = plan_network({448, 512});
  plan.features.pop_back();
  expect_invariant(plan, "features length");

  plan = plan_network({128, 128});
  plan.depth = 6;
  plan.strides.assign(6, {2, 2});
  plan.kernels.assign(7, {3, 3});
  plan.features = {32, 64, 128, 256, 512, 512, 512};
  plan.deep_supervision_heads = 4;
  expect_invariant(plan, "minimum feature-map size");

  plan = plan_network({64, 64});
  plan.strides.pop_back();
  expect_invariant(plan, "strides length");

  plan = plan_network({64, 64});
  plan.features[2] = 16;
  expect_invariant(plan, "features nondecreasing");

  plan = plan_network({64, 64});
  plan.features[4] = 1024;
  expect_invariant(plan, "feature cap");

  plan = plan_network({64, 64});
  plan.depth = 0;
  expect_invariant(plan, "depth");
}

TEST(Planner, JsonRoundTrip) {
  const NetPlan plan = plan_network({448, 512});
  const std::string json = plan_to_json(plan);
  EXPECT_EQ(plan_from_json(json), plan);
  EXPECT_EQ(plan_to_json(plan_from_json(json)), json);
  EXPECT_NE(json.find("\"bottleneck\""), std::string::npos);
}

TEST(Planner, ParseExtent) {
  EXPECT_EQ(parse_extent2("448x512"), (Extent2{448, 512}));
  EXPECT_THROW(parse_extent2("448"), ConfigError);
  EXPECT_THROW(parse_extent2("axb"), ConfigError);
}

// Property over random even patch sizes in [8, 1024].
TEST(PlannerProperty, RandomPatchesSatisfyInvariants) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> half(4, 512);
  for (int trial = 0; trial < 1000; ++trial) {
    const Extent2 patch{2 * half(rng), 2 * half(rng)};
    const NetPlan plan = plan_network(patch);
    ASSERT_NO_THROW(validate_plan(plan)) << patch[0] << "x" << patch[1];
    const int kh = halvings(patch[0]);
    const int kw = halvings(patch[1]);
    ASSERT_EQ(plan.depth, std::min({kh, kw, 6}));
    ASSERT_EQ(plan.deep_supervision_heads, std::max(plan.depth - 2, 0));
    const Extent2 b = plan.bottleneck();
    for (int a = 0; a < 2; ++a) {
      ASSERT_EQ(patch[a] % (1 << plan.depth), 0);
      ASSERT_GE(b[a], 4);
      const int k = a == 0 ? kh : kw;
      // An axis that limited depth cannot be halved again: either the extent
      // is odd or half of it drops below 4.
      if (k == plan.depth && b[a] % 2 == 0) {
        ASSERT_LE(b[a], 7);
      }
    }
    ASSERT_EQ(plan_network(patch), plan);
  }
}

}  // namespace
}  // namespace fbseg
