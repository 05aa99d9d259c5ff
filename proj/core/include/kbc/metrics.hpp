// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kbc/covgraph.hpp"
#include "kbc/rule.hpp"

namespace kbc {

/// Optional per-node length overrides; nodes not listed use the graph's length.
using LengthMap = std::map<RuleId, double>;

/// Per node, one support value per class (in graph class order).
struct SupportTable {
  std::vector<std::string> classes;
  std::map<RuleId, std::vector<double>> values;

  std::span<const double> at(RuleId id) const;
};

/// Conservative support with residuals, propagated from leaves to roots over
/// the reduced edges. A class-labelled leaf starts with its length in its
/// class; every node adds its residuals; a node passes its support to each
/// ancestor divided by its ancestor count.
SupportTable compute_support(const CoverageGraph& graph, const LengthMap& lengths = {});

/// Independent path-enumeration oracle for compute_support. Throws
/// kbc::Error above 12 nodes.
SupportTable brute_force_support(const CoverageGraph& graph, const LengthMap& lengths = {});

struct ConservationReport {
  std::vector<double> leaf_total;
  std::vector<double> root_total;

  /// |leaf_total - root_total| per class.
  std::vector<double> balance() const;
  /// Every class balanced within `relative` of its larger total.
  bool holds(double relative = 1e-9) const;
};

ConservationReport conservation_check(const CoverageGraph& graph, const SupportTable& support);

struct ClassScores {
  std::vector<double> per_class;
  double generic = 0;
  /// First class attaining the maximum.
  std::size_t argmax = 0;
};

/// opt_c = beta * (S_c - L) - (1 - beta) * sum of the other classes' support.
ClassScores optimality(double length, std::span<const double> support, double beta);

struct NodeMetrics {
  RuleId id = 0;
  std::optional<std::string> label;
  double length = 0;
  bool is_protected = false;
  std::vector<double> support;
  std::vector<double> lhat;  ///< support - length
  ClassScores opt;
  ClassScores perm;
};

/// Metrics for every node of one graph snapshot, ordered by id.
class MetricsTable {
 public:
  MetricsTable() = default;
  MetricsTable(std::vector<std::string> classes, double beta, std::vector<NodeMetrics> rows);

  const std::vector<std::string>& classes() const { return classes_; }
  double beta() const { return beta_; }
  const std::vector<NodeMetrics>& rows() const { return rows_; }
  const NodeMetrics& at(RuleId id) const;
  bool contains(RuleId id) const { return index_.count(id) != 0; }
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<std::string> classes_;
  double beta_ = 0.5;
  std::vector<NodeMetrics> rows_;
  std::map<RuleId, std::size_t> index_;
};

/// perm_c of a node: its opt_c minus the best non-negative opt_c among the
/// nodes that cover it transitively.
ClassScores permanence(const ClassScores& own, std::span<const ClassScores* const> coverers);

/// Support, optimality and permanence for the whole graph.
MetricsTable compute_metrics(const CoverageGraph& graph, double beta,
                             const LengthMap& lengths = {});

}  // namespace kbc
