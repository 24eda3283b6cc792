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

#include "fbseg/planner.hpp"

#include <algorithm>
#include <charconv>

#include "fbseg/errors.hpp"
#include "json.hpp"

namespace fbseg {
namespace {

int halvings(int axis) {
  int k = 0;
  while (axis % 2 == 0 && axis / 2 >= kMinBottleneckExtent) {
    axis /= 2;
    ++k;
  }
  return k;
}

void fail(const std::string& invariant, const std::string& detail) {
  throw ConfigError("plan invariant violated: " + invariant + " (" + detail + ")");
}

}  // namespace

Extent2 NetPlan::total_stride() const {
  Extent2 product{1, 1};
  for (const auto& s : strides) {
    product[0] *= s[0];
    product[1] *= s[1];
  }
  return product;
}

Extent2 NetPlan::bottleneck() const {
  const Extent2 stride = total_stride();
  return {patch_size[0] / stride[0], patch_size[1] / stride[1]};
}

NetPlan plan_network(Extent2 patch_size, int max_depth) {
  for (int axis : patch_size) {
    if (axis < 8 || axis % 2 != 0) {
      throw ConfigError("patch axes must be even and >= 8 (got " + std::to_string(patch_size[0]) +
                        "x" + std::to_string(patch_size[1]) + ")");
    }
  }
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");

  NetPlan plan;
  plan.patch_size = patch_size;
  plan.depth = std::min({halvings(patch_size[0]), halvings(patch_size[1]), max_depth});
  plan.strides.assign(plan.depth, Extent2{2, 2});
  plan.kernels.assign(plan.depth + 1, Extent2{3, 3});
  for (int level = 0; level <= plan.depth; ++level) {
    plan.features.push_back(std::min(kBaseFeatures << std::min(level, 16), kFeatureCap));
  }
  plan.feature_cap = kFeatureCap;
  plan.deep_supervision_heads = std::max(plan.depth - 2, 0);
  return plan;
}

void validate_plan(const NetPlan& plan) {
  if (plan.patch_size[0] < 1 || plan.patch_size[1] < 1) {
    fail("patch size", "axes must be positive");
  }
  if (plan.depth < 1) fail("depth", "depth must be >= 1");
  if (static_cast<int>(plan.strides.size()) != plan.depth) {
    fail("strides length", std::to_string(plan.strides.size()) + " != depth " +
                               std::to_string(plan.depth));
  }
  for (const auto& s : plan.strides) {
    if (s[0] < 1 || s[1] < 1) fail("strides", "stride factors must be >= 1");
  }
  if (static_cast<int>(plan.kernels.size()) != plan.depth + 1) {
    fail("kernels length", std::to_string(plan.kernels.size()) + " != depth + 1");
  }
  for (const auto& k : plan.kernels) {
    if (k[0] < 1 || k[1] < 1 || k[0] % 2 == 0 || k[1] % 2 == 0) {
      fail("kernels", "kernel sizes must be odd and positive");
    }
  }
  if (static_cast<int>(plan.features.size()) != plan.depth + 1) {
    fail("features length", std::to_string(plan.features.size()) + " != depth + 1");
  }
  if (plan.features.front() < 1) fail("features", "widths must be positive");
  if (!std::is_sorted(plan.features.begin(), plan.features.end())) {
    fail("features nondecreasing", "widths must not shrink with depth");
  }
  if (plan.features.back() > plan.feature_cap) {
    fail("feature cap", std::to_string(plan.features.back()) + " > " +
                            std::to_string(plan.feature_cap));
  }
  if (plan.deep_supervision_heads < 0 || plan.deep_supervision_heads > plan.depth - 1) {
    fail("deep supervision heads", "must be in [0, depth - 1]");
  }
  if (plan.negative_slope < 0.0) fail("nonlinearity", "negative slope must be >= 0");
  const Extent2 stride = plan.total_stride();
  for (int a = 0; a < 2; ++a) {
    if (plan.patch_size[a] % stride[a] != 0 ||
        plan.patch_size[a] / stride[a] < kMinBottleneckExtent) {
      fail("minimum feature-map size",
           "axis " + std::to_string(plan.patch_size[a]) + " / stride product " +
               std::to_string(stride[a]) + " must be an integer >= 4");
    }
  }
}

std::string plan_to_json(const NetPlan& plan) {
  nlohmann::ordered_json j;
  j["patch_size"] = plan.patch_size;
  j["depth"] = plan.depth;
  j["strides"] = plan.strides;
  j["kernels"] = plan.kernels;
  j["features"] = plan.features;
  j["feature_cap"] = plan.feature_cap;
  j["deep_supervision_heads"] = plan.deep_supervision_heads;
  j["norm"] = plan.norm;
  j["nonlinearity"] = plan.nonlinearity;
  j["negative_slope"] = plan.negative_slope;
  j["bottleneck"] = plan.bottleneck();
  return j.dump(2) + "\n";
}

NetPlan plan_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    NetPlan plan;
    plan.patch_size = j.at("patch_size").get<Extent2>();
    plan.depth = j.at("depth").get<int>();
    plan.strides = j.at("strides").get<std::vector<Extent2>>();
    plan.kernels = j.at("kernels").get<std::vector<Extent2>>();
    plan.features = j.at("features").get<std::vector<int>>();
    plan.feature_cap = j.at("feature_cap").get<int>();
    plan.deep_supervision_heads = j.at("deep_supervision_heads").get<int>();
    plan.norm = j.at("norm").get<std::string>();
    plan.nonlinearity = j.at("nonlinearity").get<std::string>();
    plan.negative_slope = j.value("negative_slope", 0.01);
    validate_plan(plan);
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed plan JSON: ") + e.what());
  }
}

Extent2 parse_extent2(const std::string& text) {
  Extent2 out{0, 0};
  const auto x = text.find('x');
  if (x == std::string::npos) throw ConfigError("expected HxW, got '" + text + "'");
  const char* begin = text.data();
  const char* mid = begin + x;
  const char* end = begin + text.size();
  auto r1 = std::from_chars(begin, mid, out[0]);
  auto r2 = std::from_chars(mid + 1, end, out[1]);
  if (r1.ec != std::errc{} || r1.ptr != mid || r2.ec != std::errc{} || r2.ptr != end) {
    throw ConfigError("expected HxW, got '" + text + "'");
  }
  return out;
}

}  // namespace fbseg
