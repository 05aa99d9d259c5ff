// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "kbc/error.hpp"
#include "kbc/harness.hpp"
#include "kbc/parser.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2 };

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw kbc::Error("cannot write " + path.string());
  out << text;
  if (!out) throw kbc::Error("failed writing " + path.string());
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file(out, text);
  }
}

// Everything in the first phase's pools, ingested once without a lifecycle step.
kbc::KnowledgeBase one_shot(const kbc::ScenarioConfig& cfg, const kbc::ScenarioData& data) {
  kbc::KnowledgeBase kb(data.classes, data.background, cfg.policy);
  kb.set_arrival_residuals(data.residuals);
  if (!data.phases.empty()) {
    std::vector<kbc::Rule> all = data.phases.front().evidence;
    all.insert(all.end(), data.phases.front().candidates.begin(),
               data.phases.front().candidates.end());
    kb.ingest(all);
  }
  for (const auto& w : kb.take_warnings()) std::cerr << "warning: " << w << "\n";
  return kb;
}

int cmd_parse(const std::string& file) {
  const kbc::Program prog = kbc::parse_file(file);
  for (const auto& r : prog.rules) std::cout << kbc::render_rule(r) << "\n";
  std::cerr << fmt::format("{}: {} clauses, classes [{}]\n", file, prog.rules.size(),
                           fmt::join(prog.classes, " "));
  return kOk;
}

int cmd_graph(const std::string& scenario, const std::string& out, bool metrics) {
  const auto cfg = kbc::load_scenario(scenario);
  const auto data = kbc::load_data(cfg);
  auto kb = one_shot(cfg, data);
  const auto& m = kb.metrics();
  emit(metrics ? kbc::metrics_csv(kb.graph(), m) : kbc::export_dot(kb.graph(), m), out);
  return kOk;
}

int cmd_run(const std::string& scenario, std::optional<std::uint64_t> seed, const fs::path& dir) {
  auto cfg = kbc::load_scenario(scenario);
  if (seed) cfg.seed = *seed;
  const auto data = kbc::load_data(cfg);
  fs::create_directories(dir);
  std::ofstream steps(dir / "steps.csv", std::ios::binary);
  if (!steps) throw kbc::Error("cannot write " + (dir / "steps.csv").string());
  steps << kbc::steps_csv_header(data.classes);
  auto result = kbc::run_scenario(cfg, data, [&](const kbc::StepLog& log) {
    steps << kbc::steps_csv_row(log);
    steps.flush();
  });
  const auto& m = result.kb.metrics();
  write_file(dir / "metrics.csv", kbc::metrics_csv(result.kb.graph(), m));
  write_file(dir / "graph.dot", kbc::export_dot(result.kb.graph(), m));
  write_file(dir / "state.snapshot", kbc::snapshot(result.kb));
  std::cerr << fmt::format("{} steps, population {}, consolidated {}\n", result.logs.size(),
                           result.kb.population(), result.kb.consolidated_count());
  return kOk;
}

int cmd_grid(const std::string& gridfile, std::size_t jobs, const fs::path& dir) {
  const auto grid = kbc::load_grid(gridfile);
  const auto data = kbc::load_data(grid.base);
  const auto result = kbc::run_grid(grid, data, jobs);
  write_file(dir / "heatmap.csv", kbc::heatmap_csv(result));
  for (const auto& f : result.failures) std::cerr << "run failed: " << f << "\n";
  std::cerr << fmt::format("{} runs, {} failed\n", result.runs, result.failures.size());
  return result.failures.empty() ? kOk : kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coverage-graph knowledge consolidation"};
  app.require_subcommand(1);

  std::string file, scenario, gridfile, out;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;

  auto* parse = app.add_subcommand("parse", "Validate a rule file and print its clauses");
  parse->add_option("file", file, "rule file (.kbr)")->required();

  auto* graph = app.add_subcommand("graph", "Build a scenario's coverage graph and print DOT");
  graph->add_option("scenario", scenario, "scenario file")->required();
  graph->add_option("--out", out, "output file (default stdout)");

  auto* metrics = app.add_subcommand("metrics", "Print one-shot metrics CSV for a scenario");
  metrics->add_option("scenario", scenario, "scenario file")->required();
  metrics->add_option("--out", out, "output file (default stdout)");

  auto* run = app.add_subcommand("run", "Run a scenario and write its logs");
  run->add_option("scenario", scenario, "scenario file")->required();
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* grid = app.add_subcommand("grid", "Run a capacity x fraction grid and write heatmap.csv");
  grid->add_option("gridfile", gridfile, "grid file")->required();
  grid->add_option("--jobs", jobs, "worker threads")->capture_default_str()->check(
      CLI::PositiveNumber);
  grid->add_option("--out", out_dir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kValidation;
  }

  try {
    if (*parse) return cmd_parse(file);
    if (*graph) return cmd_graph(scenario, out, false);
    if (*metrics) return cmd_graph(scenario, out, true);
    if (*run) return cmd_run(scenario, seed, out_dir);
    if (*grid) return cmd_grid(gridfile, jobs, out_dir);
  } catch (const kbc::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const kbc::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kRuntime;
}
