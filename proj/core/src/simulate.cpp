// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#include <bit>
#include <cmath>
#include <limits>

#include "kbc/error.hpp"
#include "kbc/harness.hpp"

namespace kbc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw Error("cannot draw an index from an empty range");
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

std::size_t sample_geometric(Rng& rng, double p) {
  if (!(p > 0 && p <= 1)) throw Error("geometric p must lie in (0, 1]");
  const double u = 1.0 - rng.uniform();  // (0, 1]
  if (p == 1.0) return 1;
  const double k = std::floor(std::log(u) / std::log1p(-p));
  return 1 + static_cast<std::size_t>(k);
}

std::uint64_t run_seed(std::uint64_t base, std::size_t capacity, double fraction, std::size_t rep) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ static_cast<std::uint64_t>(capacity));
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(fraction));
  h = splitmix64(h ^ static_cast<std::uint64_t>(rep));
  return h;
}

RunResult run_scenario(const ScenarioConfig& cfg, const ScenarioData& data, const StepSink& sink) {
  RunResult out{{}, KnowledgeBase(data.classes, data.background, cfg.policy)};
  out.kb.set_arrival_residuals(data.residuals);
  Rng rng(cfg.seed);
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    const ScenarioData::Phase* phase = data.phase_at(step);
    std::vector<Rule> arrivals;
    if (cfg.arrival_mode == ArrivalMode::Preload) {
      if (phase && step == phase->start) {
        arrivals = phase->evidence;
        arrivals.insert(arrivals.end(), phase->candidates.begin(), phase->candidates.end());
      }
    } else {
      const std::size_t ke = sample_geometric(rng, cfg.arrival_p);
      const std::size_t kr = sample_geometric(rng, cfg.arrival_p);
      if (phase) {
        if (!phase->evidence.empty())
          for (std::size_t i = 0; i < ke; ++i)
            arrivals.push_back(phase->evidence[rng.index(phase->evidence.size())]);
        if (!phase->candidates.empty())
          for (std::size_t i = 0; i < kr; ++i)
            arrivals.push_back(phase->candidates[rng.index(phase->candidates.size())]);
      }
    }
    out.logs.push_back(out.kb.step(arrivals));
    if (sink) sink(out.logs.back());
  }
  return out;
}

}  // namespace kbc
