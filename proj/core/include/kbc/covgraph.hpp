// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kbc/deduce.hpp"
#include "kbc/rule.hpp"

namespace kbc {

using EdgeSet = std::set<std::pair<RuleId, RuleId>>;

/// Which coverage test applies to which kind of pair.
struct CoverageConfig {
  CoverageMode rule_evidence = CoverageMode::Derivation;
  CoverageMode rule_rule = CoverageMode::Subsumption;
  DeriveLimits limits;
};

/// Support that could not be handed to any ancestor when a node was removed.
struct RemovalReport {
  RuleId id = 0;
  bool was_leaf = false;
  std::vector<RuleId> heirs;
  std::vector<double> lost;
};

/// Coverage DAG over working rules and evidence.
///
/// The graph stores every coverage pair it is told about. Mutual coverage is
/// resolved inside each strongly connected class by keeping only the edges
/// that go from the shorter rule to the longer one (ties by id), and the
/// reduced edge set is the transitive reduction of that acyclic relation.
/// Derived structure is rebuilt lazily after mutations, so even const
/// accessors are not safe to call concurrently.
class CoverageGraph {
 public:
  explicit CoverageGraph(std::vector<std::string> classes = {});
  CoverageGraph(const CoverageGraph&);
  CoverageGraph& operator=(const CoverageGraph&);
  CoverageGraph(CoverageGraph&&) noexcept;
  CoverageGraph& operator=(CoverageGraph&&) noexcept;
  ~CoverageGraph();

  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t class_index(std::string_view label) const;

  void add_node(Rule rule);
  /// Records that `coverer` covers `covered`. Self pairs and pairs whose
  /// coverer is evidence are ignored.
  void add_coverage(RuleId coverer, RuleId covered);

  bool contains(RuleId id) const { return nodes_.count(id) != 0; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  std::vector<RuleId> node_ids() const;
  const Rule& rule(RuleId id) const;
  double length(RuleId id) const;
  void set_protected(RuleId id, bool value);

  std::span<const double> residual(RuleId id) const;
  void set_residual(RuleId id, std::vector<double> values);

  /// Coverage pairs after cycle repair.
  const EdgeSet& full_relation() const;
  const EdgeSet& reduced_edges() const;

  std::vector<RuleId> ancestors(RuleId id) const;
  std::vector<RuleId> successors(RuleId id) const;
  /// Every node that covers `id` directly or transitively.
  std::vector<RuleId> coverers(RuleId id) const;
  std::vector<RuleId> leaves() const;
  std::vector<RuleId> roots() const;
  /// Coverers before the nodes they cover; ties broken by id.
  std::vector<RuleId> topological_order() const;

  /// Drops a node. A leaf's own mass (its length in its class plus its
  /// residuals) is split equally into the residuals of its ancestors; an
  /// internal node only passes on its residuals. With no ancestors the mass
  /// is lost and reported.
  RemovalReport remove_rule(RuleId id);

 private:
  struct Node {
    Rule rule;
    double length = 0;
    std::vector<double> residual;
    std::set<RuleId> covers;
    std::set<RuleId> covered_by;
  };
  struct Derived;

  const Derived& derived() const;
  const Node& node(RuleId id) const;
  Node& node(RuleId id);
  void invalidate();

  std::vector<std::string> classes_;
  std::map<RuleId, Node> nodes_;
  mutable std::unique_ptr<Derived> derived_;
};

/// Transitive reduction of an acyclic relation over `nodes`. Throws
/// kbc::InvariantError when the relation has a cycle.
EdgeSet transitive_reduce(std::span<const RuleId> nodes, const EdgeSet& relation);

/// Warnings raised while computing coverage (limit hits).
using Warnings = std::vector<std::string>;

/// Graph over `working` with every pairwise coverage computed through
/// `deducer` according to `cfg`.
CoverageGraph build_graph(std::span<const Rule> working, Deducer& deducer,
                          const CoverageConfig& cfg, std::vector<std::string> classes,
                          Warnings* warnings = nullptr);

/// Adds `rule` and its coverage pairs against every existing node.
void insert_rule(CoverageGraph& graph, Rule rule, Deducer& deducer, const CoverageConfig& cfg,
                 Warnings* warnings = nullptr);

}  // namespace kbc
