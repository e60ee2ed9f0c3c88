// Copyright 2026 The elicit Authors
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

#include "elicit/analysis.hpp"
#include "elicit/generators.hpp"
#include "elicit/mechanisms.hpp"
#include "elicit/synthesis.hpp"
#include "elicit/verifier.hpp"

namespace {

using namespace elicit;

SignMatrix example_signs() {
  SignMatrix s(3, 3);
  s << 1, -1, -1, -1, 1, -1, -1, -1, 1;
  return s;
}

ProblemInstance ca_instance(std::size_t count, std::size_t tasks) {
  return ProblemInstance::uniform(sample_sign_pattern(example_signs(), count, 11), ReportSpec::identity(), tasks);
}

void BM_VerifyScoringExact(benchmark::State& state) {
  const auto instance = ca_instance(static_cast<std::size_t>(state.range(0)), 2);
  const auto mech = ca_mechanism(example_signs(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(verify_strict(instance, mech, VerifyMode::ScoringExact));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_VerifyScoringExact)->Arg(10)->Arg(100);

void BM_VerifyConsistentGeneral(benchmark::State& state) {
  const auto instance = ca_instance(1, static_cast<std::size_t>(state.range(0)));
  const auto mech = ca_mechanism(example_signs(), instance.task_count());
  for (auto _ : state) benchmark::DoNotOptimize(verify_strict(instance, mech, VerifyMode::ConsistentGeneral));
}
BENCHMARK(BM_VerifyConsistentGeneral)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_SynthesizeScoring(benchmark::State& state) {
  const auto instance = ca_instance(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_scoring(instance));
}
BENCHMARK(BM_SynthesizeScoring)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_FitPowerDiagram(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::map<std::string, std::vector<Vector>> labeled;
  const PowerDiagram truth{{Vector::Unit(3, 0), Vector::Unit(3, 1), Vector::Unit(3, 2)}, {0.0, 0.0, 0.0}, {"a", "b", "c"}};
  while (labeled.size() < 3 || labeled.begin()->second.size() < static_cast<std::size_t>(state.range(0))) {
    const Vector u = dirichlet(rng, 3);
    if (cell_margin(truth, u) < 0.05) continue;
    const CellAssignment cell = cell_assign(truth, u);
    if (const auto* win = std::get_if<CellWinner>(&cell)) labeled[win->label].push_back(u);
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_power_diagram(labeled));
}
BENCHMARK(BM_FitPowerDiagram)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_ConvexSeparation(benchmark::State& state) {
  const auto instance = ca_instance(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(check_convex_separation(instance));
}
BENCHMARK(BM_ConvexSeparation)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
