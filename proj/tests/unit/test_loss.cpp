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

#include <cmath>
#include <random>

#include "fbseg/errors.hpp"
#include "fbseg/loss.hpp"

namespace fbseg {
namespace {

Tensor one_hot_probs(const LabelMap& t) {
  Tensor p(t.n, 2, t.h, t.w);
  for (std::size_t b = 0; b < t.n; ++b) {
    for (std::size_t y = 0; y < t.h; ++y) {
      for (std::size_t x = 0; x < t.w; ++x) {
        p(b, t(b, y, x), y, x) = 1.0;
      }
    }
  }
  return p;
}

LabelMap checker(std::size_t n, std::size_t h, std::size_t w) {
  LabelMap t(n, h, w);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) t(b, y, x) = (x + y) % 2;
    }
  }
  return t;
}

TEST(DiceLoss, PerfectPredictionIsNearZero) {
  const LabelMap t = checker(2, 4, 4);
  EXPECT_LT(dice_loss(one_hot_probs(t), t), 1e-4);
}

TEST(DiceLoss, ZeroForegroundProbability) {
  const LabelMap t = checker(1, 4, 4);  // N = 8 foreground pixels
  Tensor p(1, 2, 4, 4);
  for (std::size_t i = 0; i < 16; ++i) p.values()[i] = 1.0;  // background channel
  const double n = 8.0;
  EXPECT_NEAR(dice_loss(p, t), 1.0 - kDiceSmooth / (n + kDiceSmooth), 1e-12);
}

TEST(DiceLoss, EmptyTargetWithZeroForegroundIsZero) {
  const LabelMap t(1, 3, 3);
  Tensor p(1, 2, 3, 3);
  for (std::size_t i = 0; i < 9; ++i) p.values()[i] = 1.0;
  EXPECT_NEAR(dice_loss(p, t), 0.0, 1e-12);
}

TEST(DiceLoss, ShapeMismatchIsValidationError) {
  EXPECT_THROW(dice_loss(Tensor(1, 2, 4, 4), LabelMap(1, 4, 5)), ValidationError);
  EXPECT_THROW(dice_loss(Tensor(1, 3, 4, 4), LabelMap(1, 4, 4)), ValidationError);
}

TEST(Softmax, RowsSumToOneAndSurviveLargeLogits) {
  Tensor l(1, 2, 1, 3);
  l(0, 0, 0, 0) = 1000.0;
  l(0, 1, 0, 0) = -1000.0;
  l(0, 0, 0, 1) = 0.3;
  l(0, 1, 0, 1) = 0.3;
  l(0, 0, 0, 2) = -2.0;
  l(0, 1, 0, 2) = 1.0;
  const Tensor p = softmax(l);
  for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(p(0, 0, 0, x) + p(0, 1, 0, x), 1.0, 1e-15);
  EXPECT_NEAR(p(0, 0, 0, 0), 1.0, 1e-15);
  EXPECT_NEAR(p(0, 1, 0, 1), 0.5, 1e-15);
  EXPECT_NEAR(p(0, 1, 0, 2), 1.0 / (1.0 + std::exp(-3.0)), 1e-15);
}

TEST(CombinedLoss, UniformLogitsBalancedTargetGivesLn2) {
  const LabelMap t = checker(1, 4, 4);
  const Tensor logits(1, 2, 4, 4, 0.0);
  EXPECT_NEAR(cross_entropy(logits, t), std::log(2.0), 1e-6);
  const LossResult r = combined_loss({logits}, t, LossWeights{0.0, 1.0});
  EXPECT_NEAR(r.value, std::log(2.0), 1e-6);
}

TEST(CombinedLoss, ConfidentPerfectLogitsGiveNearZero) {
  const LabelMap t = checker(2, 4, 4);
  Tensor logits = one_hot_probs(t);
  for (auto& v : logits.values()) v = v > 0 ? 30.0 : -30.0;
  EXPECT_LT(combined_loss({logits}, t, LossWeights{}).value, 1e-3);
}

TEST(CombinedLoss, DiceOnlyWeightsEqualDiceLoss) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0, 2);
  Tensor logits(2, 2, 3, 5);
  for (auto& v : logits.values()) v = d(rng);
  const LabelMap t = checker(2, 3, 5);
  EXPECT_NEAR(combined_loss({logits}, t, LossWeights{1.0, 0.0}).value,
              dice_loss(softmax(logits), t), 1e-7);
}

TEST(CombinedLoss, DeepSupervisionWeightsHalveAndNormalize) {
  const auto w = deep_supervision_weights(3);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_NEAR(w[0], 4.0 / 7.0, 1e-15);
  EXPECT_NEAR(w[1], 2.0 / 7.0, 1e-15);
  EXPECT_NEAR(w[2], 1.0 / 7.0, 1e-15);
  EXPECT_EQ(deep_supervision_weights(1), std::vector<double>{1.0});
}

TEST(CombinedLoss, DownsampleNearestTakesTopLeftOfEachCell) {
  LabelMap t(1, 4, 4);
  t(0, 0, 2) = 1;
  t(0, 1, 1) = 1;  // not on the sampling grid
  t(0, 2, 0) = 1;
  const LabelMap d = downsample_nearest(t, 2);
  ASSERT_EQ(d.h, 2u);
  ASSERT_EQ(d.w, 2u);
  EXPECT_EQ(d(0, 0, 0), 0);
  EXPECT_EQ(d(0, 0, 1), 1);
  EXPECT_EQ(d(0, 1, 0), 1);
  EXPECT_EQ(d(0, 1, 1), 0);
}

TEST(CombinedLoss, MultiHeadIsWeightedSumOfHeads) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(0, 1);
  Tensor full(1, 2, 4, 4), half(1, 2, 2, 2);
  for (auto& v : full.values()) v = d(rng);
  for (auto& v : half.values()) v = d(rng);
  const LabelMap t = checker(1, 4, 4);
  const LossWeights w{};
  const double l0 = combined_loss({full}, t, w).value;
  const double l1 = combined_loss({half}, downsample_nearest(t, 2), w).value;
  EXPECT_NEAR(combined_loss({full, half}, t, w).value, 2.0 / 3.0 * l0 + 1.0 / 3.0 * l1, 1e-12);
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

// Central differences on the 1x2x2x2 logits of a single head.
TEST(CombinedLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> d(0, 1);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor logits(1, 2, 2, 2);
    for (auto& v : logits.values()) v = d(rng);
    LabelMap t(1, 2, 2);
    t(0, 0, 0) = 1;
    t(0, 1, trial % 2) = 1;
    const LossWeights w{1.0, 1.0};
    const LossResult r = combined_loss({logits}, t, w);
    for (std::size_t i = 0; i < logits.size(); ++i) {
      const double h = 1e-5;
      Tensor up = logits, down = logits;
      up.values()[i] += h;
      down.values()[i] -= h;
      const double numeric =
          (combined_loss({up}, t, w).value - combined_loss({down}, t, w).value) / (2 * h);
      EXPECT_LE(relative_error(r.grads[0].values()[i], numeric), 1e-4)
          << "trial " << trial << " element " << i;
    }
  }
}

TEST(CombinedLoss, MultiHeadGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> d(0, 1);
  std::vector<Tensor> logits{Tensor(2, 2, 4, 4), Tensor(2, 2, 2, 2)};
  for (auto& t : logits) {
    for (auto& v : t.values()) v = d(rng);
  }
  const LabelMap target = checker(2, 4, 4);
  const LossWeights w{0.7, 1.3};
  const LossResult r = combined_loss(logits, target, w);
  for (std::size_t k = 0; k < logits.size(); ++k) {
    for (std::size_t i = 0; i < logits[k].size(); ++i) {
      const double h = 1e-5;
      auto up = logits, down = logits;
      up[k].values()[i] += h;
      down[k].values()[i] -= h;
      const double numeric =
          (combined_loss(up, target, w).value - combined_loss(down, target, w).value) / (2 * h);
      EXPECT_LE(relative_error(r.grads[k].values()[i], numeric), 1e-4);
    }
  }
}

TEST(CombinedLossProperty, NonnegativeForNonnegativeWeights) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> d(0, 5);
  std::uniform_real_distribution<double> u(0, 2);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor logits(1, 2, 3, 3);
    for (auto& v : logits.values()) v = d(rng);
    LabelMap t(1, 3, 3);
    for (auto& v : t.labels) v = coin(rng);
    const LossWeights w{u(rng), u(rng)};
    EXPECT_GE(combined_loss({logits}, t, w).value, 0.0);
  }
}

}  // namespace
}  // namespace fbseg
