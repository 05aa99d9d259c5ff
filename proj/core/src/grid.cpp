// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "kbc/harness.hpp"

namespace kbc {

namespace {

struct Job {
  std::size_t cap_index;
  std::size_t frac_index;
  std::size_t rep;
};

struct Outcome {
  std::set<std::string> consolidated;
  std::string failure;
};

Outcome run_one(const GridConfig& grid, const ScenarioData& data, const Job& job) {
  Outcome out;
  ScenarioConfig cfg = grid.base;
  cfg.policy.capacity = grid.capacities[job.cap_index];
  cfg.policy.forget_fraction = grid.fractions[job.frac_index];
  cfg.seed = run_seed(grid.base.seed, cfg.policy.capacity, cfg.policy.forget_fraction, job.rep);
  try {
    RunResult r = run_scenario(cfg, data);
    for (RuleId id : r.kb.consolidated())
      out.consolidated.insert(canonical_form(r.kb.graph().rule(id)));
  } catch (const std::exception& e) {
    out.failure = fmt::format("capacity={} fraction={} rep={}: {}", cfg.policy.capacity,
                              cfg.policy.forget_fraction, job.rep, e.what());
  }
  return out;
}

}  // namespace

GridResult run_grid(const GridConfig& grid, const ScenarioData& data, std::size_t jobs) {
  grid.validate();
  std::vector<Job> work;
  for (std::size_t c = 0; c < grid.capacities.size(); ++c)
    for (std::size_t f = 0; f < grid.fractions.size(); ++f)
      for (std::size_t r = 0; r < grid.repetitions; ++r) work.push_back({c, f, r});

  std::vector<Outcome> outcomes(work.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (std::size_t i = cursor++; i < work.size(); i = cursor++)
      outcomes[i] = run_one(grid, data, work[i]);
  };
  const std::size_t n = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(work.size(), 1));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }

  GridResult result;
  result.runs = work.size();
  std::map<std::tuple<std::size_t, std::size_t, std::string>, std::size_t> counts;
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (!outcomes[i].failure.empty()) result.failures.push_back(outcomes[i].failure);
    for (const auto& form : outcomes[i].consolidated)
      ++counts[{work[i].cap_index, work[i].frac_index, form}];
  }
  for (const auto& [key, count] : counts) {
    const auto& [c, f, form] = key;
    result.rows.push_back({grid.capacities[c], grid.fractions[f], form, count});
  }
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.capacity, a.fraction, a.rule) < std::tie(b.capacity, b.fraction, b.rule);
  });
  return result;
}

}  // namespace kbc
