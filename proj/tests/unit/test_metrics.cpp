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

#include <algorithm>
#include <random>

#include "fbseg/errors.hpp"
#include "fbseg/metrics.hpp"
#include "oracles.hpp"

namespace fbseg {
namespace {

Volume<std::uint8_t> from_indices(Shape3 shape, std::initializer_list<std::size_t> on) {
  Volume<std::uint8_t> v(shape, 0);
  for (auto i : on) v.values()[i] = 1;
  return v;
}

TEST(Dice, IdenticalNonemptyIsOne) {
  const auto a = from_indices({4, 4, 4}, {1, 5, 9});
  EXPECT_EQ(dice_3d(a, a).value, 1.0);
}

TEST(Dice, DisjointIsZero) {
  EXPECT_EQ(dice_3d(from_indices({4, 4, 4}, {1, 2}), from_indices({4, 4, 4}, {3, 4})).value, 0.0);
}

TEST(Dice, HalfOverlap) {
  const DiceScore d =
      dice_3d(from_indices({4, 4, 4}, {0, 1, 2, 3}), from_indices({4, 4, 4}, {2, 3, 4, 5}));
  EXPECT_EQ(d.pred_voxels, 4u);
  EXPECT_EQ(d.gt_voxels, 4u);
  EXPECT_EQ(d.intersection, 2u);
  EXPECT_DOUBLE_EQ(d.value, 0.5);
}

TEST(Dice, BothEmptyIsOne) {
  const Volume<std::uint8_t> e(Shape3{3, 3, 3}, 0);
  EXPECT_EQ(dice_3d(e, e).value, 1.0);
}

TEST(Dice, ShapeMismatchIsValidationError) {
  EXPECT_THROW(dice_3d(Volume<std::uint8_t>(Shape3{2, 2, 2}), Volume<std::uint8_t>(Shape3{2, 2, 3})),
               ValidationError);
}

TEST(DiceProperty, MatchesOracleSymmetricAndPermutationInvariant) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> density(0.05, 0.7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = testing::random_mask({8, 8, 8}, density(rng), rng);
    const auto b = testing::random_mask({8, 8, 8}, density(rng), rng);
    const DiceScore d = dice_3d(a, b);
    const auto o = testing::brute_force_dice(a, b);
    ASSERT_EQ(d.pred_voxels, o.pred);
    ASSERT_EQ(d.gt_voxels, o.gt);
    ASSERT_EQ(d.intersection, o.intersection);
    ASSERT_EQ(d.value, o.value);
    ASSERT_EQ(dice_3d(b, a).value, d.value);
    ASSERT_GE(d.value, 0.0);
    ASSERT_LE(d.value, 1.0);
    ASSERT_EQ(d.value == 1.0, a == b || (d.pred_voxels == 0 && d.gt_voxels == 0));

    std::vector<std::size_t> perm(a.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Volume<std::uint8_t> pa(a.shape()), pb(b.shape());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      pa.values()[i] = a.values()[perm[i]];
      pb.values()[i] = b.values()[perm[i]];
    }
    ASSERT_EQ(dice_3d(pa, pb).value, d.value);
  }
}

TEST(Outliers, StrictThreshold) {
  const std::vector<double> s{0.95, 0.89, 0.90, 0.30};
  EXPECT_EQ(count_outliers(s, 0.9), 2u);
  EXPECT_EQ(count_outliers(std::vector<double>{}), 0u);
  EXPECT_EQ(count_outliers(std::vector<double>(7, 1.0)), 0u);
}

TEST(OutliersProperty, PartitionsScores) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(static_cast<std::size_t>(trial));
    for (auto& v : s) v = u(rng);
    const double t = u(rng);
    const auto at_least = static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [&](double v) { return v >= t; }));
    ASSERT_EQ(count_outliers(s, t) + at_least, s.size());
  }
}

TEST(Summarize, SingleValue) {
  const ScoreSummary s = summarize(std::vector<double>{0.2});
  EXPECT_EQ(s.min, 0.2);
  EXPECT_EQ(s.q1, 0.2);
  EXPECT_EQ(s.median, 0.2);
  EXPECT_EQ(s.q3, 0.2);
  EXPECT_EQ(s.max, 0.2);
  EXPECT_NEAR(s.mean, 0.2, 1e-15);
  EXPECT_EQ(s.count, 1u);
  EXPECT_EQ(s.outliers, 1u);
}

TEST(Summarize, Symmetric) {
  const ScoreSummary s = summarize(std::vector<double>{1.0, 0.0, 0.5});
  EXPECT_EQ(s.median, 0.5);
  EXPECT_NEAR(s.mean, 0.5, 1e-15);
}

TEST(Summarize, InterpolatedQuartiles) {
  const ScoreSummary s = summarize(std::vector<double>{0.4, 0.1, 0.3, 0.2});
  EXPECT_NEAR(s.q1, 0.175, 1e-12);
  EXPECT_NEAR(s.median, 0.25, 1e-12);
  EXPECT_NEAR(s.q3, 0.325, 1e-12);
}

TEST(Summarize, EmptyIsValidationError) {
  EXPECT_THROW(summarize(std::vector<double>{}), ValidationError);
}

}  // namespace
}  // namespace fbseg
