// Copyright 2026 The instreg Authors
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

#include <random>

#include <benchmark/benchmark.h>

#include "instreg/attention.hpp"
#include "instreg/embedding.hpp"
#include "instreg/geometry.hpp"
#include "instreg/matching.hpp"
#include "instreg/preprocess.hpp"
#include "instreg/scene.hpp"

namespace {

using namespace instreg;

Points cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.5);
  Points out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(g(rng), g(rng), g(rng));
  return out;
}

Eigen::MatrixXd gaussian(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

void BM_WeightedSvd(benchmark::State& state) {
  const auto pts = cloud(static_cast<std::size_t>(state.range(0)), 1);
  const auto t = RigidTransform::from_axis_angle(Eigen::Vector3d(1, 2, 3).normalized(), 0.7);
  std::vector<Correspondence> corrs;
  for (const auto& p : pts) corrs.push_back({p, t(p), 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(weighted_svd(corrs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WeightedSvd)->Arg(64)->Arg(512)->Arg(4096);

void BM_Sinkhorn(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd fp = gaussian(n, 32, 2), fq = gaussian(n, 32, 3);
  const SinkhornConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(sinkhorn_match(fp, fq, cfg));
}
BENCHMARK(BM_Sinkhorn)->Arg(64)->Arg(256)->Arg(512);

void BM_KnnTable(benchmark::State& state) {
  const auto pts = cloud(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(knn_table(pts, 16));
}
BENCHMARK(BM_KnnTable)->Arg(256)->Arg(1024)->Arg(4096);

void BM_VoxelDownsample(benchmark::State& state) {
  PointCloud c;
  c.points = cloud(static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(voxel_downsample(c, 0.025));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_VoxelDownsample)->Arg(10000)->Arg(100000);

void BM_TransformerForward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = 64;
  SuperpointGraph g;
  g.superpoints = cloud(static_cast<std::size_t>(n), 6);
  g.knn = knn_table(g.superpoints, 16);
  g.geodesic = geodesic_table(g, 8);
  EmbeddingConfig ecfg;
  ecfg.dim = d;
  const auto structure = geometric_structure_embedding(g, ecfg);
  const auto geo = geodesic_sinusoid(g, ecfg);
  const WeightSet w = WeightSet::random(32, d, 4, 3, 7);
  const Eigen::MatrixXd fp = gaussian(n, 32, 8), fq = gaussian(n, 32, 9);
  const TransformerInputs in{&g, &g, &structure, &structure, &geo};
  for (auto _ : state) benchmark::DoNotOptimize(run_transformer(fp, fq, in, w, 0.6));
}
BENCHMARK(BM_TransformerForward)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_GenerateScene(benchmark::State& state) {
  SceneSpec spec;
  spec.min_instances = spec.max_instances = static_cast<int>(state.range(0));
  spec.occlusion = 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(generate_scene(spec));
}
BENCHMARK(BM_GenerateScene)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
