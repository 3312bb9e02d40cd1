// Copyright 2026 The corotk Authors
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

#include <random>

#include "corotk/components.hpp"
#include "corotk/metrics.hpp"
#include "corotk/resample.hpp"
#include "corotk/skeleton.hpp"
#include "phantoms.hpp"

using namespace corotk;

namespace {

phantom::Bits vessel_tree(std::int64_t n) {
  phantom::Bits b({n, n, n});
  const double c = n / 2.0, r = n / 16.0;
  b.capsule({c, c, 2}, {c, c, n - 3.0}, r);
  b.capsule({c, c, c}, {n - 4.0, c, n - 4.0}, r * 0.8);
  b.capsule({c, c, c * 0.6}, {4, n - 4.0, c}, r * 0.7);
  return b;
}

void BM_LabelComponents(benchmark::State& state) {
  std::mt19937 rng(1);
  const auto n = state.range(0);
  const Volume v = phantom::random_blobs(rng, {n, n, n}, 40).volume(0.35);
  for (auto _ : state) benchmark::DoNotOptimize(label_components(v));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(v.size()));
}
BENCHMARK(BM_LabelComponents)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Skeletonize(benchmark::State& state) {
  const auto b = vessel_tree(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(skeletonize_bits(b.v, b.dims));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.count()));
}
BENCHMARK(BM_Skeletonize)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_EvaluateCase(benchmark::State& state) {
  const auto g = vessel_tree(state.range(0));
  auto p = g;
  p.box({4, 4, 4}, {10, 10, 10});
  const Volume pv = p.volume(0.35), gv = g.volume(0.35);
  const auto flags = PostProcess::parse("vol50");
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_case(pv, gv, nullptr, flags));
}
BENCHMARK(BM_EvaluateCase)->Arg(64)->Arg(96)->Unit(benchmark::kMillisecond);

void BM_ResampleTrilinear(benchmark::State& state) {
  std::vector<float> data(64 * 64 * 64);
  std::mt19937 rng(3);
  std::uniform_real_distribution<float> hu(-200, 400);
  for (auto& x : data) x = hu(rng);
  const Volume v(phantom::grid({64, 64, 64}, 0.5), VoxelKind::intensity, data, DataType::float32);
  for (auto _ : state) benchmark::DoNotOptimize(resample(v, {0.35, 0.35, 0.35}, Interpolation::trilinear));
}
BENCHMARK(BM_ResampleTrilinear)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
