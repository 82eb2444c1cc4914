// Copyright 2026 The classim Authors.
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

// Serial reference implementations against their parallel / FFT
// counterparts. Run with OMP_NUM_THREADS to compare thread counts.

#include <benchmark/benchmark.h>

#include "classim/convolver.hpp"
#include "classim/kernels.hpp"
#include "classim/room.hpp"
#include "classim/seed.hpp"

namespace {

using namespace classim;

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal();
  return x;
}

// One second of 16 kHz audio through kernels of range(0) taps.
void BM_ConvolveDirectReference(benchmark::State& state) {
  const auto x = noise(16000, 1);
  const auto h = noise(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::convolve_direct_reference(x, h));
  state.SetItemsProcessed(state.iterations() * 16000);
}
BENCHMARK(BM_ConvolveDirectReference)->Arg(512)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_ConvolveDirect(benchmark::State& state) {
  const auto x = noise(16000, 1);
  const auto h = noise(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::convolve_direct(x, h));
  state.SetItemsProcessed(state.iterations() * 16000);
}
BENCHMARK(BM_ConvolveDirect)->Arg(512)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_ConvolvePartitioned(benchmark::State& state) {
  const auto x = noise(16000, 1);
  const auto h = noise(static_cast<std::size_t>(state.range(0)), 2);
  const PartitionedConvolver engine(h);
  for (auto _ : state) benchmark::DoNotOptimize(engine.apply(x));
  state.SetItemsProcessed(state.iterations() * 16000);
}
BENCHMARK(BM_ConvolvePartitioned)->Arg(512)->Arg(4096)->Arg(16000)->Unit(benchmark::kMillisecond);

std::vector<std::vector<double>> unit_vectors(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(noise(dim, seed + i));
  return out;
}

void BM_SimilarityReference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = unit_vectors(n, 768, 10), b = unit_vectors(n, 768, 9000);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::similarity_matrix_reference(a, b));
}
BENCHMARK(BM_SimilarityReference)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Similarity(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = unit_vectors(n, 768, 10), b = unit_vectors(n, 768, 9000);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::similarity_matrix(a, b));
}
BENCHMARK(BM_Similarity)->Arg(256)->Unit(benchmark::kMillisecond);

SimulationOptions rir_options() {
  SimulationOptions o;
  o.sample_rate = 16000;
  o.rir_len_s = 0.5;
  o.max_order = 12;
  return o;
}

void BM_SimulateRirReference(benchmark::State& state) {
  const Room room;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_rir_reference(room, {2.0, 2.5, 1.4}, {6.3, 4.1, 1.2}, rir_options()));
  }
}
BENCHMARK(BM_SimulateRirReference)->Unit(benchmark::kMillisecond);

void BM_SimulateRir(benchmark::State& state) {
  const Room room;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_rir(room, {2.0, 2.5, 1.4}, {6.3, 4.1, 1.2}, rir_options()));
  }
}
BENCHMARK(BM_SimulateRir)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
