// Copyright 2026 The qtraj Authors
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

#include <complex>
#include <random>

#include "qtraj/ift_estimator.hpp"

namespace {

using namespace qtraj;

LindbladModel fig3_weak() { return build_two_level_direct({8e-4, 1 / 2.7e-3, 4.8e-4, 1 / 1.3e-3, 8e-5, 1000.0}); }

void BM_MatrixExp(benchmark::State& state) {
  const Index n = state.range(0);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = Complex(d(gen), d(gen)) * 0.1;
  const Operator op(a);
  for (auto _ : state) benchmark::DoNotOptimize(matrix_exp(op));
}
BENCHMARK(BM_MatrixExp)->Arg(2)->Arg(4)->Arg(8);

void BM_ForwardSimulate(benchmark::State& state) {
  const LindbladModel m = build_two_level_direct({8e-3, 370.0, 4.8e-3, 770.0, 8e-4, 1000.0});
  const PropagatorGrid grid(m, 1.0, 1250.0);
  std::uint64_t stream = 0;
  for (auto _ : state) {
    CounterRng rng(1, stream++);
    benchmark::DoNotOptimize(forward_simulate(m, grid, sample_initial_state(rng), rng));
  }
}
BENCHMARK(BM_ForwardSimulate);

void BM_BackwardConstruct(benchmark::State& state) {
  const LindbladModel m = build_two_level_direct({8e-3, 370.0, 4.8e-3, 770.0, 8e-4, 1000.0});
  const PropagatorGrid grid(m, 1.0, 1250.0);
  CounterRng rng(1, 0);
  const TrajectoryRecord fwd = forward_simulate(m, grid, sample_initial_state(rng), rng);
  for (auto _ : state) benchmark::DoNotOptimize(backward_construct(m, grid, fwd));
}
BENCHMARK(BM_BackwardConstruct);

void BM_Estimate(benchmark::State& state) {
  const LindbladModel m = fig3_weak();
  EstimatorOptions opt;
  opt.n_trajectories = static_cast<std::size_t>(state.range(0));
  opt.horizon = 1250.0;
  for (auto _ : state) benchmark::DoNotOptimize(estimate(m, opt, sample_initial_state));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Estimate)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
