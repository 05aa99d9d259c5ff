// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#include "kbc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kbc/error.hpp"

namespace kbc {

namespace {

double length_of(const CoverageGraph& g, const LengthMap& lengths, RuleId id) {
  auto it = lengths.find(id);
  return it == lengths.end() ? g.length(id) : it->second;
}

}  // namespace

std::span<const double> SupportTable::at(RuleId id) const {
  auto it = values.find(id);
  if (it == values.end()) throw Error("no support row for rule " + std::to_string(id));
  return it->second;
}

SupportTable compute_support(const CoverageGraph& graph, const LengthMap& lengths) {
  SupportTable table;
  table.classes = graph.classes();
  const std::size_t k = table.classes.size();
  const auto order = graph.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const RuleId id = *it;
    const auto res = graph.residual(id);
    std::vector<double> s(res.begin(), res.end());
    const auto succ = graph.successors(id);
    if (succ.empty()) {
      const Rule& r = graph.rule(id);
      if (r.label) s[graph.class_index(*r.label)] += length_of(graph, lengths, id);
    }
    for (RuleId v : succ) {
      const double share = 1.0 / static_cast<double>(graph.ancestors(v).size());
      const auto& sv = table.values.at(v);
      for (std::size_t c = 0; c < k; ++c) s[c] += sv[c] * share;
    }
    table.values.emplace(id, std::move(s));
  }
  return table;
}

std::vector<double> ConservationReport::balance() const {
  std::vector<double> out(leaf_total.size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = std::fabs(leaf_total[c] - root_total[c]);
  return out;
}

bool ConservationReport::holds(double relative) const {
  const auto b = balance();
  for (std::size_t c = 0; c < b.size(); ++c) {
    const double scale = std::max({1.0, std::fabs(leaf_total[c]), std::fabs(root_total[c])});
    if (b[c] > relative * scale) return false;
  }
  return true;
}

ConservationReport conservation_check(const CoverageGraph& graph, const SupportTable& support) {
  ConservationReport r;
  const std::size_t k = graph.classes().size();
  r.leaf_total.assign(k, 0.0);
  r.root_total.assign(k, 0.0);
  for (RuleId id : graph.leaves()) {
    const auto s = support.at(id);
    for (std::size_t c = 0; c < k; ++c) r.leaf_total[c] += s[c];
  }
  for (RuleId id : graph.roots()) {
    const auto s = support.at(id);
    for (std::size_t c = 0; c < k; ++c) r.root_total[c] += s[c];
  }
  return r;
}

ClassScores optimality(double length, std::span<const double> support, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error("beta must lie in [0, 1]");
  ClassScores out;
  double total = 0;
  for (double s : support) total += s;
  out.per_class.resize(support.size());
  for (std::size_t c = 0; c < support.size(); ++c)
    out.per_class[c] = beta * (support[c] - length) - (1.0 - beta) * (total - support[c]);
  out.generic = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < out.per_class.size(); ++c) {
    if (out.per_class[c] > out.generic) {
      out.generic = out.per_class[c];
      out.argmax = c;
    }
  }
  if (out.per_class.empty()) out.generic = 0;
  return out;
}

ClassScores permanence(const ClassScores& own, std::span<const ClassScores* const> coverers) {
  ClassScores out;
  out.per_class = own.per_class;
  for (std::size_t c = 0; c < out.per_class.size(); ++c) {
    double best = 0;
    for (const ClassScores* cv : coverers) best = std::max(best, cv->per_class[c]);
    out.per_class[c] -= best;
  }
  out.generic = out.per_class.empty() ? 0 : -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < out.per_class.size(); ++c) {
    if (out.per_class[c] > out.generic) {
      out.generic = out.per_class[c];
      out.argmax = c;
    }
  }
  return out;
}

MetricsTable::MetricsTable(std::vector<std::string> classes, double beta,
                           std::vector<NodeMetrics> rows)
    : classes_(std::move(classes)), beta_(beta), rows_(std::move(rows)) {
  std::sort(rows_.begin(), rows_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < rows_.size(); ++i) index_[rows_[i].id] = i;
}

const NodeMetrics& MetricsTable::at(RuleId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error("no metrics row for rule " + std::to_string(id));
  return rows_[it->second];
}

MetricsTable compute_metrics(const CoverageGraph& graph, double beta, const LengthMap& lengths) {
  const SupportTable support = compute_support(graph, lengths);
  std::vector<NodeMetrics> rows;
  std::map<RuleId, std::size_t> at;
  for (RuleId id : graph.node_ids()) {
    NodeMetrics m;
    m.id = id;
    const Rule& r = graph.rule(id);
    m.label = r.label;
    m.is_protected = r.is_protected;
    m.length = length_of(graph, lengths, id);
    const auto s = support.at(id);
    m.support.assign(s.begin(), s.end());
    for (double v : m.support) m.lhat.push_back(v - m.length);
    m.opt = optimality(m.length, m.support, beta);
    at[id] = rows.size();
    rows.push_back(std::move(m));
  }
  for (auto& m : rows) {
    std::vector<const ClassScores*> cov;
    for (RuleId u : graph.coverers(m.id)) cov.push_back(&rows[at.at(u)].opt);
    m.perm = permanence(m.opt, cov);
  }
  return MetricsTable(graph.classes(), beta, std::move(rows));
}

}  // namespace kbc
