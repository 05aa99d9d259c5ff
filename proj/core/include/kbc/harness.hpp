// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "kbc/lifecycle.hpp"
#include "kbc/metrics.hpp"
#include "kbc/rule.hpp"

namespace kbc {

namespace fs = std::filesystem;

/// Pools active over an inclusive step range.
struct PhaseConfig {
  std::size_t start = 1;
  std::size_t end = 0;
  std::vector<fs::path> evidence;
  std::vector<fs::path> candidates;
};

enum class ArrivalMode { Geometric, Preload };

/// Scenario file contents. Paths are resolved against the file's directory.
struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::size_t steps = 100;
  double arrival_p = 0.5;
  ArrivalMode arrival_mode = ArrivalMode::Geometric;
  Policy policy;
  std::vector<std::string> classes;
  std::vector<fs::path> background;
  std::vector<fs::path> evidence;
  std::vector<fs::path> candidates;
  std::vector<fs::path> targets;
  /// Explicit phases; when empty the top-level pools cover every step.
  std::vector<PhaseConfig> phases;

  void validate() const;
};

/// Parses `key = value` scenario text. Throws kbc::ConfigError.
ScenarioConfig parse_scenario(std::string_view text, const fs::path& base_dir = {});
ScenarioConfig load_scenario(const fs::path& path);

struct GridConfig {
  ScenarioConfig base;
  std::vector<std::size_t> capacities;
  std::vector<double> fractions;
  std::size_t repetitions = 1;

  void validate() const;
  std::size_t runs() const { return capacities.size() * fractions.size() * repetitions; }
};

/// Grid text holds `scenario = <file>` plus `capacities`, `fractions` and
/// `repetitions`; any other key overrides the scenario's setting.
GridConfig parse_grid(std::string_view text, const fs::path& base_dir = {});
GridConfig load_grid(const fs::path& path);

/// Rules read from a scenario's files, shared read-only across runs.
struct ScenarioData {
  struct Phase {
    std::size_t start = 1;
    std::size_t end = 0;
    std::vector<Rule> evidence;
    std::vector<Rule> candidates;
  };

  std::vector<std::string> classes;
  std::vector<Rule> background;
  std::vector<Phase> phases;
  std::vector<Rule> targets;
  std::map<RuleId, std::vector<double>> residuals;

  const Phase* phase_at(std::size_t step) const;
};

ScenarioData load_data(const ScenarioConfig& cfg);

/// 64-bit generator with explicit uniform and index draws so that a seed
/// fixes every sample regardless of standard-library distribution details.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [0, n).
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// k >= 1 with Pr(k) = (1 - p)^(k - 1) p, by inversion of one uniform draw.
std::size_t sample_geometric(Rng& rng, double p);

/// Seed of one grid cell repetition.
std::uint64_t run_seed(std::uint64_t base, std::size_t capacity, double fraction, std::size_t rep);

struct RunResult {
  std::vector<StepLog> logs;
  KnowledgeBase kb;
};

using StepSink = std::function<void(const StepLog&)>;

RunResult run_scenario(const ScenarioConfig& cfg, const ScenarioData& data,
                       const StepSink& sink = {});

struct HeatRow {
  std::size_t capacity = 0;
  double fraction = 0;
  std::string rule;
  std::size_t count = 0;
};

struct GridResult {
  std::vector<HeatRow> rows;
  std::size_t runs = 0;
  std::vector<std::string> failures;
};

/// Runs every (capacity, fraction, repetition) cell; `jobs` workers.
GridResult run_grid(const GridConfig& grid, const ScenarioData& data, std::size_t jobs = 1);

std::string steps_csv_header(const std::vector<std::string>& classes);
std::string steps_csv_row(const StepLog& log);
std::string metrics_csv(const CoverageGraph& graph, const MetricsTable& metrics);
std::string heatmap_csv(const GridResult& grid);
std::string export_dot(const CoverageGraph& graph, const MetricsTable& metrics);
/// Re-ingestable `.kbr` text with ids, protection flags and residuals.
std::string snapshot(const KnowledgeBase& kb);
/// Rebuilds a knowledge base from snapshot text under `policy`.
KnowledgeBase load_snapshot(std::string_view text, Policy policy);

}  // namespace kbc
