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

#include "corotk/armature.hpp"
#include "corotk/mesh.hpp"
#include "phantoms.hpp"

using namespace corotk;

namespace {

void BM_Voxelize(benchmark::State& state) {
  const SurfaceMesh sphere = phantom::icosphere({0.1, 0.2, 0.3}, 5.0, 5);
  const double h = 1.0 / static_cast<double>(state.range(0));
  const auto n = static_cast<std::int64_t>(std::ceil(12.0 / h));
  const Grid g = phantom::grid({n, n, n}, h, {-6, -6, -6});
  for (auto _ : state) benchmark::DoNotOptimize(voxelize(sphere, g));
  state.counters["voxels"] = static_cast<double>(g.voxel_count());
}
BENCHMARK(BM_Voxelize)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_SliceContours(benchmark::State& state) {
  const SurfaceMesh sphere = phantom::icosphere({0, 0, 0}, 5.0, static_cast<int>(state.range(0)));
  double z = -4.9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(slice_contours(sphere, z));
    z = z > 4.8 ? -4.9 : z + 0.1;
  }
}
BENCHMARK(BM_SliceContours)->Arg(4)->Arg(6);

void BM_DeformMesh(benchmark::State& state) {
  std::mt19937 rng(4);
  const Armature a = build_armature(phantom::random_tree(rng, 6), 2.0);
  SurfaceMesh m;
  std::uniform_real_distribution<double> u(-15, 15);
  for (int i = 0; i < state.range(0); ++i) m.vertices.push_back({u(rng), u(rng), u(rng)});
  m = compute_weights(m, a);
  Pose p;
  std::normal_distribution<double> nrm;
  for (const auto& b : a.bones()) p = pose_rotate(a, p, b.id, Quat::from_axis_angle({nrm(rng), nrm(rng), 1}, 0.1));
  for (auto _ : state) benchmark::DoNotOptimize(deform_mesh(m, a, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DeformMesh)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
