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

#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "fbseg/connected_components.hpp"
#include "fbseg/metrics.hpp"
#include "fbseg/model.hpp"
#include "fbseg/nifti.hpp"
#include "fbseg/phantom.hpp"
#include "fbseg/planner.hpp"

namespace {

using namespace fbseg;

Volume<std::uint8_t> noisy_mask(Shape3 shape, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution on(density);
  Volume<std::uint8_t> v(shape, 0);
  for (auto& x : v.values()) x = on(rng) ? 1 : 0;
  return v;
}

void BM_Dice3d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = noisy_mask({n, n, 16}, 0.3, 1);
  const auto b = noisy_mask({n, n, 16}, 0.3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(dice_3d(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.size()));
}
BENCHMARK(BM_Dice3d)->Arg(64)->Arg(256);

void BM_KeepLargestCc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto mask = noisy_mask({n, n, 16}, 0.35, 3);
  for (auto _ : state) benchmark::DoNotOptimize(keep_largest_cc(mask, Connectivity::kFull));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mask.size()));
}
BENCHMARK(BM_KeepLargestCc)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

Tensor random_batch(std::size_t n, std::size_t hw) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor t(n, 1, hw, hw);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

void BM_ModelForward(benchmark::State& state) {
  const auto hw = static_cast<std::size_t>(state.range(0));
  const auto model = build_model(plan_network({static_cast<int>(hw), static_cast<int>(hw)}), 5);
  const Tensor x = random_batch(2, hw);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x, Mode::kInference));
}
BENCHMARK(BM_ModelForward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ModelForwardBackward(benchmark::State& state) {
  const auto hw = static_cast<std::size_t>(state.range(0));
  auto model = build_model(plan_network({static_cast<int>(hw), static_cast<int>(hw)}), 5);
  const Tensor x = random_batch(2, hw);
  for (auto _ : state) {
    Tape tape;
    const auto outputs = model.forward(x, tape);
    std::vector<Tensor> seeds;
    for (const auto& o : outputs) seeds.emplace_back(o.shape(), 1.0);
    nn::Gradients grads = model.parameters().zeros_like();
    model.backward(tape, seeds, grads);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(BM_ModelForwardBackward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_NiftiRoundTrip(benchmark::State& state) {
  PhantomSpec spec;
  spec.shape = {128, 128, 20};
  const auto pair = generate_phantoms(spec).front();
  const auto path = std::filesystem::temp_directory_path() / "fbseg_bench_stack.nii.gz";
  for (auto _ : state) {
    save_stack(pair.stack, path);
    benchmark::DoNotOptimize(load_stack(path));
  }
  std::filesystem::remove(path);
}
BENCHMARK(BM_NiftiRoundTrip)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
