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
#include <limits>
#include <random>

#include "fbseg/errors.hpp"
#include "fbseg/model.hpp"
#include "oracles.hpp"

namespace fbseg {
namespace {

Tensor random_input(std::size_t n, std::size_t h, std::size_t w, std::uint64_t seed) {
  Tensor t(n, 1, h, w);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

TEST(Model, BuildIsDeterministic) {
  const NetPlan plan = plan_network({64, 64});
  const auto a = build_model(plan, 0);
  const auto b = build_model(plan, 0);
  ASSERT_EQ(a.parameters().size(), b.parameters().size());
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    EXPECT_EQ(a.parameters()[i].name, b.parameters()[i].name);
    EXPECT_EQ(a.parameters()[i].value, b.parameters()[i].value);
  }
  const auto c = build_model(plan, 1);
  EXPECT_NE(a.parameters()[0].value, c.parameters()[0].value);
}

TEST(Model, ParameterCountMatchesClosedForm) {
  for (const Extent2 patch : {Extent2{8, 8}, Extent2{16, 32}, Extent2{64, 64}, Extent2{96, 64}}) {
    const NetPlan plan = plan_network(patch);
    const auto model = build_model(plan, 0);
    EXPECT_EQ(model.parameter_count(),
              testing::unet_parameter_count(plan.features, plan.deep_supervision_heads));
  }
}

TEST(Model, GoldenParameterCountFor64x64) {
  EXPECT_EQ(build_model(plan_network({64, 64}), 0).parameter_count(), 7762406u);
}

TEST(Model, ForwardOnZerosHasPatchShapeAndIsFinite) {
  const auto model = build_model(plan_network({64, 64}), 0);
  const auto out = model.forward(Tensor(1, 1, 64, 64), Mode::kInference);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].shape(), (Tensor::Shape{1, 2, 64, 64}));
  EXPECT_TRUE(out[0].all_finite());
}

TEST(Model, DeepSupervisionHeadsHalveResolution) {
  const auto model = build_model(plan_network({64, 64}), 0);
  const auto out = model.forward(Tensor(1, 1, 64, 64), Mode::kTraining);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].shape(), (Tensor::Shape{1, 2, 64, 64}));
  EXPECT_EQ(out[1].shape(), (Tensor::Shape{1, 2, 32, 32}));
  EXPECT_EQ(out[2].shape(), (Tensor::Shape{1, 2, 16, 16}));
}

TEST(Model, DepthOnePlanInferenceReturnsOneOutput) {
  const auto model = build_model(plan_network({8, 8}), 0);
  const auto out = model.forward(random_input(2, 8, 8, 1), Mode::kInference);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].shape(), (Tensor::Shape{2, 2, 8, 8}));
}

TEST(Model, NaNInputIsRejected) {
  const auto model = build_model(plan_network({16, 16}), 0);
  Tensor x = random_input(1, 16, 16, 2);
  x(0, 0, 3, 3) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(model.forward(x, Mode::kInference), ValidationError);
}

TEST(Model, IncompatibleShapesAreRejected) {
  const auto model = build_model(plan_network({64, 64}), 0);
  EXPECT_THROW(model.forward(Tensor(1, 1, 63, 64), Mode::kInference), ValidationError);
  EXPECT_THROW(model.forward(Tensor(1, 2, 64, 64), Mode::kInference), ValidationError);
  EXPECT_THROW(model.forward(Tensor(1, 1, 32, 64), Mode::kInference), ValidationError);
  // Larger multiples of the stride product are accepted for full-slice inference.
  EXPECT_NO_THROW(model.forward(Tensor(1, 1, 80, 64), Mode::kInference));
}

TEST(Model, InvalidPlanIsConfigError) {
  NetPlan plan = plan_network({64, 64});
  plan.features.pop_back();
  EXPECT_THROW(build_model(plan, 0), ConfigError);
}

TEST(Model, BatchEntriesAreIndependent) {
  const auto model = build_model(plan_network({16, 16}), 3);
  const Tensor a = random_input(1, 16, 16, 4);
  const Tensor b = random_input(1, 16, 16, 5);
  Tensor both(2, 1, 16, 16);
  std::copy(a.values().begin(), a.values().end(), both.values().begin());
  std::copy(b.values().begin(), b.values().end(), both.values().begin() + 256);
  const Tensor ya = model.logits(a);
  const Tensor yb = model.logits(b);
  const Tensor yab = model.logits(both);
  for (std::size_t i = 0; i < ya.size(); ++i) {
    EXPECT_NEAR(yab.values()[i], ya.values()[i], 1e-9);
    EXPECT_NEAR(yab.values()[ya.size() + i], yb.values()[i], 1e-9);
  }
}

// Scalar objective: fixed random weighting of every output element.
double objective(const std::vector<Tensor>& outputs, const std::vector<Tensor>& weights) {
  double s = 0.0;
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    for (std::size_t i = 0; i < outputs[k].size(); ++i) {
      s += outputs[k].values()[i] * weights[k].values()[i];
    }
  }
  return s;
}

TEST(Model, GradientsMatchCentralDifferences) {
  const NetPlan plan = plan_network({32, 32});  // depth 3, one head
  auto model = build_model(plan, 9);
  const Tensor x = random_input(2, 32, 32, 10);

  Tape tape;
  const auto outputs = model.forward(x, tape);
  ASSERT_EQ(outputs.size(), 2u);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<Tensor> weights;
  for (const auto& o : outputs) {
    Tensor w(o.shape());
    for (auto& v : w.values()) v = dist(rng);
    weights.push_back(w);
  }
  nn::Gradients grads = model.parameters().zeros_like();
  model.backward(tape, weights, grads);

  auto& params = model.parameters();
  std::uniform_int_distribution<std::size_t> pick_param(0, params.size() - 1);
  const double step = 1e-6;  // small enough to stay clear of LeakyReLU kinks
  int checked = 0;
  while (checked < 10) {
    const std::size_t p = pick_param(rng);
    std::uniform_int_distribution<std::size_t> pick_index(0, params[p].value.size() - 1);
    const std::size_t i = pick_index(rng);
    double& theta = params[p].value.values()[i];
    const double saved = theta;
    theta = saved + step;
    const double up = objective(model.forward(x, Mode::kTraining), weights);
    theta = saved - step;
    const double down = objective(model.forward(x, Mode::kTraining), weights);
    theta = saved;
    const double numeric = (up - down) / (2 * step);
    const double analytic = grads[p].values()[i];
    const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
    EXPECT_LE(std::abs(numeric - analytic) / scale, 1e-3)
        << params[p].name << "[" << i << "] analytic " << analytic << " numeric " << numeric;
    ++checked;
  }
}

TEST(Model, TranslationByStrideProductShiftsPrediction) {
  const NetPlan plan = plan_network({64, 64});
  const auto model = build_model(plan, 21);
  const int shift = plan.total_stride()[0];
  Tensor a(1, 1, 64, 64);
  Tensor b(1, 1, 64, 64);
  for (int y = 16; y < 32; ++y) {
    for (int x = 20; x < 36; ++x) {
      a(0, 0, y, x) = 1.0;
      b(0, 0, y + shift, x) = 1.0;
    }
  }
  const Tensor la = model.logits(a);
  const Tensor lb = model.logits(b);
  auto fg = [](const Tensor& l, int y, int x) { return l(0, 1, y, x) > l(0, 0, y, x); };
  std::size_t agree = 0, total = 0;
  for (int y = 8; y < 64 - shift - 8; ++y) {
    for (int x = 8; x < 56; ++x) {
      ++total;
      agree += fg(la, y, x) == fg(lb, y + shift, x);
    }
  }
  EXPECT_GE(static_cast<double>(agree) / total, 0.8);
}

TEST(Model, ParameterNamesFollowStructure) {
  const auto model = build_model(plan_network({64, 64}), 0);
  const auto& p = model.parameters();
  EXPECT_EQ(p[0].name, "encoder.0.block0.conv.weight");
  bool has_output = false, has_head = false, has_up = false;
  for (const auto& e : p.entries()) {
    has_output |= e.name == "output.bias";
    has_head |= e.name == "head.2.weight";
    has_up |= e.name == "decoder.3.up.weight";
  }
  EXPECT_TRUE(has_output);
  EXPECT_TRUE(has_head);
  EXPECT_TRUE(has_up);
}

}  // namespace
}  // namespace fbseg
