// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kbc/covgraph.hpp"
#include "kbc/deduce.hpp"
#include "kbc/metrics.hpp"
#include "kbc/rule.hpp"

namespace kbc {

/// Promotion or demotion threshold over the generic optimality of the
/// graph's nodes.
struct Threshold {
  enum class Mode { AvgOpt, AvgOptClamped, Fixed };

  Mode mode = Mode::AvgOptClamped;
  double value = 0;  ///< used by Fixed

  /// "avg_opt", "avg_opt_clamped" or "fixed:<v>" (v may be -inf / inf).
  static Threshold parse(std::string_view text);
  std::string to_string() const;
  double evaluate(std::span<const double> opts) const;
};

struct Policy {
  double beta = 0.5;
  Threshold theta_p;
  Threshold theta_d;
  double forget_fraction = 0.25;
  /// Maximum number of graph nodes; 0 means unbounded.
  std::size_t capacity = 0;
  /// When set, only rules whose best class is this one are promoted.
  std::optional<std::string> consolidation_class;
  CoverageConfig coverage;

  void validate(std::span<const std::string> classes) const;
};

struct IngestResult {
  std::vector<RuleId> inserted;
  std::size_t duplicates = 0;
};

/// One row of the per-step log.
struct StepLog {
  std::size_t step = 0;
  std::size_t arrivals_examples = 0;
  std::size_t arrivals_rules = 0;
  std::size_t population_w = 0;
  std::size_t consolidated_count = 0;
  double avg_opt_w = 0;
  double avg_opt_cons = 0;
  std::vector<RuleId> forgotten;
  std::vector<RuleId> promoted;
  std::vector<RuleId> demoted;
  std::vector<double> root_support;
  std::size_t inserted = 0;
  std::vector<std::string> warnings;
};

/// Working rules, consolidated rules and the seed background, with the
/// forgetting / promotion / demotion lifecycle.
///
/// Seed background rules (B0) feed the deductive engine but are never graph
/// nodes. Consolidated rules stay in the graph flagged protected and are
/// appended to the background used for later coverage tests. The population
/// bounded by the capacity is the whole graph, protected nodes included.
class KnowledgeBase {
 public:
  KnowledgeBase(std::vector<std::string> classes, std::vector<Rule> seed_background, Policy policy);

  const Policy& policy() const { return policy_; }
  const std::vector<std::string>& classes() const { return graph_.classes(); }
  const CoverageGraph& graph() const { return graph_; }
  const std::vector<Rule>& seed_background() const { return b0_; }
  /// Metrics of the current graph, recomputed when stale.
  const MetricsTable& metrics();

  std::size_t population() const { return graph_.size(); }
  std::vector<RuleId> consolidated() const;
  std::size_t consolidated_count() const { return consolidated_.size(); }
  bool is_consolidated(RuleId id) const { return consolidated_.count(id) != 0; }

  /// Adds rules, dropping those whose canonical form is already present.
  /// Rules are copied as given, ids included; ids must be fresh.
  IngestResult ingest(std::span<const Rule> rules);
  /// Residuals given to listed rules whenever they are ingested.
  void set_arrival_residuals(std::map<RuleId, std::vector<double>> residuals) {
    arrival_residuals_ = std::move(residuals);
  }
  /// Restores a node with a residual and protection flag (snapshots).
  void restore(Rule rule, std::vector<double> residual);

  /// Forgets in batches while the population exceeds capacity.
  std::vector<RuleId> forget_step();
  std::vector<RuleId> demote_pass();
  std::vector<RuleId> promote_pass();

  /// ingest, forget, demote, promote, then a log row.
  StepLog step(std::span<const Rule> arrivals);

  std::size_t steps_taken() const { return steps_; }
  std::vector<double> root_support();
  /// Warnings since the last call.
  std::vector<std::string> take_warnings();

 private:
  void rebuild_deducer();
  void extend_deducer(std::span<const RuleId> ids);
  double threshold(const Threshold& t);

  Policy policy_;
  std::vector<Rule> b0_;
  std::set<RuleId> b0_ids_;
  CoverageGraph graph_;
  std::set<RuleId> consolidated_;
  std::vector<RuleId> consolidation_order_;
  std::set<std::string> forms_;
  std::map<RuleId, std::vector<double>> arrival_residuals_;
  Deducer deducer_;
  std::optional<MetricsTable> metrics_;
  std::vector<std::string> warnings_;
  std::size_t steps_ = 0;
};

}  // namespace kbc
