// Copyright 2026 The synseg Authors. All Rights Reserved.
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

#include "synseg/crf.hpp"
#include "synseg/geometry.hpp"
#include "synseg/retrieval.hpp"
#include "synseg/stain.hpp"

namespace synseg {
namespace {

Tile NoiseTile(int side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tile t;
  t.pixels = RgbImage(side, side, 3);
  for (auto& v : t.pixels.data()) v = static_cast<std::uint8_t>(rng() % 256);
  return t;
}

ProbabilityMap DiscProbability(int side) {
  ProbabilityMap p;
  p.values = Image<float>(side, side, 1);
  const double c = side / 2.0;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const double r = std::hypot(x - c, y - c);
      p.values.at(x, y, 0) = r < side / 4.0 ? 0.8f : 0.2f;
    }
  }
  return p;
}

void BM_CrfFast(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Tile tile = NoiseTile(side, 1);
  const auto unary = UnaryFromProbability(DiscProbability(side));
  for (auto _ : state) {
    benchmark::DoNotOptimize(MeanFieldFast(tile, unary, CrfParams{}));
  }
}
BENCHMARK(BM_CrfFast)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_CrfExact(benchmark::State& state) {
  const Tile tile = NoiseTile(64, 2);
  const auto unary = UnaryFromProbability(DiscProbability(64));
  for (auto _ : state) {
    benchmark::DoNotOptimize(MeanFieldExact(tile, unary, CrfParams{}));
  }
}
BENCHMARK(BM_CrfExact)->Unit(benchmark::kMillisecond);

void BM_Snmf(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  const StainBasis refs = DefaultReferenceBasis();
  OdImage od{Image<float>(side, side, 3), "bench"};
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const auto col = refs.column(static_cast<StainRole>(rng() % 3));
      const double c = 0.4 + static_cast<double>(rng() % 1000) / 1000.0;
      for (int ch = 0; ch < 3; ++ch) od.values.at(x, y, ch) = static_cast<float>(c * col[ch]);
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(SnmfDecompose(od));
}
BENCHMARK(BM_Snmf)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Knn(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 128;
  std::mt19937_64 rng(4);
  std::normal_distribution<float> normal;
  std::vector<float> v(m * d);
  for (auto& x : v) x = normal(rng);
  std::vector<std::string> ids(m);
  for (std::size_t i = 0; i < m; ++i) ids[i] = "agg_" + std::to_string(i);
  const EmbeddingIndex index(v, d, ids);
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.Knn(index.row(q++ % m)));
  }
}
BENCHMARK(BM_Knn)->Arg(1000)->Arg(4819)->Unit(benchmark::kMicrosecond);

void BM_Feret(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::vector<PixelPoint> pts;
  for (int i = 0; i < state.range(0); ++i) {
    pts.push_back({static_cast<int>(rng() % 1024), static_cast<int>(rng() % 1024)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(FeretDiameter(pts));
}
BENCHMARK(BM_Feret)->Arg(1000)->Arg(100000)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace synseg

BENCHMARK_MAIN();
