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

#include "fbseg/layers.hpp"
#include "fbseg/optimizer.hpp"

namespace fbseg {
namespace {

TEST(PolyLearningRate, EndpointsAndMonotonicity) {
  EXPECT_DOUBLE_EQ(poly_learning_rate(0.01, 0, 100, 0.9), 0.01);
  EXPECT_DOUBLE_EQ(poly_learning_rate(0.01, 100, 100, 0.9), 0.0);
  EXPECT_NEAR(poly_learning_rate(0.01, 50, 100, 0.9), 0.01 * std::pow(0.5, 0.9), 1e-15);
  double previous = 1.0;
  for (int e = 0; e <= 100; ++e) {
    const double lr = poly_learning_rate(0.01, e, 100, 0.9);
    EXPECT_LE(lr, previous);
    previous = lr;
  }
}

// Reference: v <- mu v + g; p <- p - lr (g + mu v).
TEST(NesterovSgd, MatchesHandComputedSteps) {
  nn::ParameterSet params;
  params.add("w", {1, 1, 1, 2});
  params[0].value.values() = {1.0, -2.0};
  NesterovSgd opt(params, 0.9, 0.0);
  nn::Gradients grads = params.zeros_like();

  grads[0].values() = {0.5, 1.0};
  opt.step(params, grads, 0.1);
  // v = g; p -= 0.1 * (g + 0.9 g) = 0.19 g
  EXPECT_NEAR(params[0].value.values()[0], 1.0 - 0.19 * 0.5, 1e-15);
  EXPECT_NEAR(params[0].value.values()[1], -2.0 - 0.19 * 1.0, 1e-15);

  grads[0].values() = {0.5, 1.0};
  opt.step(params, grads, 0.1);
  // v = 0.9 g + g = 1.9 g; p -= 0.1 * (g + 0.9 * 1.9 g) = 0.271 g
  EXPECT_NEAR(params[0].value.values()[0], 1.0 - (0.19 + 0.271) * 0.5, 1e-14);
}

TEST(NesterovSgd, ClipsGlobalNorm) {
  nn::ParameterSet params;
  params.add("a", {1, 1, 1, 1});
  params.add("b", {1, 1, 1, 1});
  NesterovSgd opt(params, 0.0, 1.0);
  nn::Gradients grads = params.zeros_like();
  grads[0].values() = {3.0};
  grads[1].values() = {4.0};
  const double norm = opt.step(params, grads, 1.0);
  EXPECT_DOUBLE_EQ(norm, 5.0);
  EXPECT_NEAR(params[0].value.values()[0], -0.6, 1e-12);
  EXPECT_NEAR(params[1].value.values()[0], -0.8, 1e-12);
}

TEST(NesterovSgd, ZeroGradientsResets) {
  nn::ParameterSet params;
  params.add("a", {1, 1, 2, 2});
  nn::Gradients grads = params.zeros_like();
  grads[0].fill(3.0);
  zero_gradients(grads);
  for (double v : grads[0].values()) EXPECT_EQ(v, 0.0);
}

}  // namespace
}  // namespace fbseg
