// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "kbc/covgraph.hpp"
#include "kbc/deduce.hpp"
#include "kbc/harness.hpp"
#include "kbc/metrics.hpp"
#include "kbc/parser.hpp"

namespace {

using namespace kbc;

// Random layered DAG: node i may cover any j < i.
CoverageGraph random_graph(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CoverageGraph g({"+", "-"});
  for (RuleId id = 1; id <= n; ++id) {
    Rule r;
    r.id = id;
    r.head.predicate = "n" + std::to_string(id);
    r.length_override = 1.0 + 10.0 * unit(rng);
    g.add_node(std::move(r));
  }
  for (RuleId u = 2; u <= n; ++u)
    for (RuleId v = 1; v < u; ++v)
      if (unit(rng) < p) g.add_coverage(u, v);
  return g;
}

void BM_TransitiveReduce(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const CoverageGraph g = random_graph(n, 0.2, 7);
  const EdgeSet full = g.full_relation();
  const auto ids = g.node_ids();
  for (auto _ : state) benchmark::DoNotOptimize(transitive_reduce(ids, full));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TransitiveReduce)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_ComputeSupport(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const CoverageGraph g = random_graph(n, 0.1, 11);
  g.reduced_edges();
  for (auto _ : state) benchmark::DoNotOptimize(compute_support(g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ComputeSupport)->RangeMultiplier(2)->Range(16, 512)->Complexity();

void BM_CoversFamily(benchmark::State& state) {
  const std::string dir = std::string(KBC_DATA_DIR) + "/family/";
  const std::vector<Rule> working = parse_file(dir + "family.kbr").rules;
  Deducer d{Background(parse_file(dir + "family_bk.kbr").rules)};
  const auto mode = state.range(0) ? CoverageMode::Derivation : CoverageMode::Subsumption;
  for (auto _ : state)
    for (const auto& a : working)
      for (const auto& b : working) benchmark::DoNotOptimize(d.covers(a, b, mode));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(working.size() * working.size()));
}
BENCHMARK(BM_CoversFamily)->Arg(0)->Arg(1);

void BM_ChessRun(benchmark::State& state) {
  ScenarioConfig cfg = load_scenario(std::string(KBC_DATA_DIR) + "/chess/chess.scn");
  cfg.steps = static_cast<std::size_t>(state.range(0));
  const ScenarioData data = load_data(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(cfg, data).logs.size());
}
BENCHMARK(BM_ChessRun)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
