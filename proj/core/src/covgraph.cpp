// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#include "kbc/covgraph.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

#include "bitset.hpp"
#include "kbc/error.hpp"

namespace kbc {

using detail::Bitset;

namespace {

// Reachability (strict descendants) of an acyclic adjacency list, plus a
// topological order. Returns false on a cycle.
bool closure_of(const std::vector<std::vector<std::size_t>>& out, std::vector<std::size_t>& topo,
                std::vector<Bitset>& reach) {
  const std::size_t n = out.size();
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& succ : out)
    for (std::size_t v : succ) ++indegree[v];
  // Min-heap keeps the order deterministic and id-ascending among ties.
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t u = 0; u < n; ++u)
    if (indegree[u] == 0) ready.push(u);
  topo.clear();
  while (!ready.empty()) {
    const std::size_t u = ready.top();
    ready.pop();
    topo.push_back(u);
    for (std::size_t v : out[u])
      if (--indegree[v] == 0) ready.push(v);
  }
  if (topo.size() != n) return false;
  reach.assign(n, Bitset(n));
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const std::size_t u = *it;
    for (std::size_t v : out[u]) {
      reach[u].set(v);
      reach[u] |= reach[v];
    }
  }
  return true;
}

std::vector<std::vector<std::size_t>> reduce(const std::vector<std::vector<std::size_t>>& out,
                                             const std::vector<Bitset>& reach) {
  const std::size_t n = out.size();
  std::vector<std::vector<std::size_t>> kept(n);
  for (std::size_t u = 0; u < n; ++u) {
    Bitset via(n);
    for (std::size_t w : out[u]) via |= reach[w];
    for (std::size_t v : out[u])
      if (!via.test(v)) kept[u].push_back(v);
  }
  return kept;
}

// Strongly connected classes by mutual reachability.
std::vector<std::size_t> scc_labels(const std::vector<std::vector<std::size_t>>& out) {
  const std::size_t n = out.size();
  std::vector<Bitset> reach(n, Bitset(n));
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    stack.assign(1, s);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : out[u]) {
        if (reach[s].test(v)) continue;
        reach[s].set(v);
        stack.push_back(v);
      }
    }
  }
  std::vector<std::size_t> label(n);
  for (std::size_t u = 0; u < n; ++u) {
    label[u] = u;
    for (std::size_t v = 0; v < u; ++v) {
      if (reach[u].test(v) && reach[v].test(u)) {
        label[u] = label[v];
        break;
      }
    }
  }
  return label;
}

}  // namespace

struct CoverageGraph::Derived {
  std::vector<RuleId> ids;
  std::map<RuleId, std::size_t> index;
  std::vector<std::vector<std::size_t>> full_out;
  std::vector<Bitset> reach;
  std::vector<std::size_t> topo;
  std::vector<std::vector<std::size_t>> suc;
  std::vector<std::vector<std::size_t>> anc;
  EdgeSet full;
  EdgeSet reduced;
};

CoverageGraph::CoverageGraph(std::vector<std::string> classes) : classes_(std::move(classes)) {}
CoverageGraph::CoverageGraph(const CoverageGraph& o) : classes_(o.classes_), nodes_(o.nodes_) {}
CoverageGraph& CoverageGraph::operator=(const CoverageGraph& o) {
  if (this != &o) {
    classes_ = o.classes_;
    nodes_ = o.nodes_;
    derived_.reset();
  }
  return *this;
}
CoverageGraph::CoverageGraph(CoverageGraph&&) noexcept = default;
CoverageGraph& CoverageGraph::operator=(CoverageGraph&&) noexcept = default;
CoverageGraph::~CoverageGraph() = default;

std::size_t CoverageGraph::class_index(std::string_view label) const {
  auto it = std::find(classes_.begin(), classes_.end(), label);
  if (it == classes_.end()) throw Error("unknown class '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - classes_.begin());
}

void CoverageGraph::invalidate() { derived_.reset(); }

const CoverageGraph::Node& CoverageGraph::node(RuleId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error("rule " + std::to_string(id) + " is not in the graph");
  return it->second;
}

CoverageGraph::Node& CoverageGraph::node(RuleId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error("rule " + std::to_string(id) + " is not in the graph");
  return it->second;
}

void CoverageGraph::add_node(Rule rule) {
  if (nodes_.count(rule.id)) throw Error("duplicate node id " + std::to_string(rule.id));
  if (rule.label) class_index(*rule.label);
  Node n;
  n.length = rule_length(rule);
  n.residual.assign(classes_.size(), 0.0);
  const RuleId id = rule.id;
  n.rule = std::move(rule);
  nodes_.emplace(id, std::move(n));
  invalidate();
}

void CoverageGraph::add_coverage(RuleId coverer, RuleId covered) {
  if (coverer == covered) return;
  Node& a = node(coverer);
  Node& b = node(covered);
  if (a.rule.is_evidence()) return;
  if (a.covers.insert(covered).second) {
    b.covered_by.insert(coverer);
    invalidate();
  }
}

std::vector<RuleId> CoverageGraph::node_ids() const {
  std::vector<RuleId> ids;
  ids.reserve(nodes_.size());
  for (const auto& [id, n] : nodes_) ids.push_back(id);
  return ids;
}

const Rule& CoverageGraph::rule(RuleId id) const { return node(id).rule; }
double CoverageGraph::length(RuleId id) const { return node(id).length; }
void CoverageGraph::set_protected(RuleId id, bool value) { node(id).rule.is_protected = value; }

std::span<const double> CoverageGraph::residual(RuleId id) const { return node(id).residual; }

void CoverageGraph::set_residual(RuleId id, std::vector<double> values) {
  if (values.size() != classes_.size()) throw Error("residual needs one value per class");
  for (double v : values)
    if (!(v >= 0)) throw Error("residual support must be non-negative");
  node(id).residual = std::move(values);
}

const CoverageGraph::Derived& CoverageGraph::derived() const {
  if (derived_) return *derived_;
  auto d = std::make_unique<Derived>();
  d->ids = node_ids();
  const std::size_t n = d->ids.size();
  for (std::size_t i = 0; i < n; ++i) d->index[d->ids[i]] = i;

  std::vector<std::vector<std::size_t>> raw(n);
  for (std::size_t i = 0; i < n; ++i)
    for (RuleId v : nodes_.at(d->ids[i]).covers) raw[i].push_back(d->index.at(v));

  const auto label = scc_labels(raw);
  auto key = [&](std::size_t i) { return std::make_tuple(nodes_.at(d->ids[i]).length, d->ids[i]); };
  d->full_out.assign(n, {});
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v : raw[u])
      if (label[u] != label[v] || key(u) < key(v)) d->full_out[u].push_back(v);

  if (!closure_of(d->full_out, d->topo, d->reach))
    throw InvariantError("coverage relation is cyclic after repair");
  d->suc = reduce(d->full_out, d->reach);
  d->anc.assign(n, {});
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v : d->suc[u]) d->anc[v].push_back(u);
  for (auto& a : d->anc) std::sort(a.begin(), a.end());

  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v : d->full_out[u]) d->full.emplace(d->ids[u], d->ids[v]);
    for (std::size_t v : d->suc[u]) d->reduced.emplace(d->ids[u], d->ids[v]);
  }
  derived_ = std::move(d);
  return *derived_;
}

const EdgeSet& CoverageGraph::full_relation() const { return derived().full; }
const EdgeSet& CoverageGraph::reduced_edges() const { return derived().reduced; }

std::vector<RuleId> CoverageGraph::ancestors(RuleId id) const {
  node(id);
  const auto& d = derived();
  std::vector<RuleId> out;
  for (std::size_t u : d.anc[d.index.at(id)]) out.push_back(d.ids[u]);
  return out;
}

std::vector<RuleId> CoverageGraph::successors(RuleId id) const {
  node(id);
  const auto& d = derived();
  std::vector<RuleId> out;
  for (std::size_t v : d.suc[d.index.at(id)]) out.push_back(d.ids[v]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RuleId> CoverageGraph::coverers(RuleId id) const {
  node(id);
  const auto& d = derived();
  const std::size_t v = d.index.at(id);
  std::vector<RuleId> out;
  for (std::size_t u = 0; u < d.ids.size(); ++u)
    if (d.reach[u].test(v)) out.push_back(d.ids[u]);
  return out;
}

std::vector<RuleId> CoverageGraph::leaves() const {
  const auto& d = derived();
  std::vector<RuleId> out;
  for (std::size_t u = 0; u < d.ids.size(); ++u)
    if (d.suc[u].empty()) out.push_back(d.ids[u]);
  return out;
}

std::vector<RuleId> CoverageGraph::roots() const {
  const auto& d = derived();
  std::vector<RuleId> out;
  for (std::size_t u = 0; u < d.ids.size(); ++u)
    if (d.anc[u].empty()) out.push_back(d.ids[u]);
  return out;
}

std::vector<RuleId> CoverageGraph::topological_order() const {
  const auto& d = derived();
  std::vector<RuleId> out;
  out.reserve(d.topo.size());
  for (std::size_t u : d.topo) out.push_back(d.ids[u]);
  return out;
}

RemovalReport CoverageGraph::remove_rule(RuleId id) {
  Node& victim = node(id);
  RemovalReport report;
  report.id = id;
  report.heirs = ancestors(id);
  report.was_leaf = successors(id).empty();
  report.lost.assign(classes_.size(), 0.0);

  std::vector<double> mass = victim.residual;
  if (report.was_leaf && victim.rule.label) mass[class_index(*victim.rule.label)] += victim.length;

  if (report.heirs.empty()) {
    report.lost = mass;
  } else {
    const double share = 1.0 / static_cast<double>(report.heirs.size());
    for (RuleId a : report.heirs) {
      auto& res = node(a).residual;
      for (std::size_t c = 0; c < res.size(); ++c) res[c] += mass[c] * share;
    }
  }

  for (RuleId v : victim.covers) node(v).covered_by.erase(id);
  for (RuleId u : victim.covered_by) node(u).covers.erase(id);
  nodes_.erase(id);
  invalidate();
  return report;
}

EdgeSet transitive_reduce(std::span<const RuleId> nodes, const EdgeSet& relation) {
  std::vector<RuleId> ids(nodes.begin(), nodes.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::map<RuleId, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;
  std::vector<std::vector<std::size_t>> out(ids.size());
  for (const auto& [a, b] : relation) {
    auto ia = index.find(a);
    auto ib = index.find(b);
    if (ia == index.end() || ib == index.end())
      throw Error("relation mentions a node outside the node set");
    if (a == b) throw InvariantError("self pair in coverage relation");
    out[ia->second].push_back(ib->second);
  }
  std::vector<std::size_t> topo;
  std::vector<Bitset> reach;
  if (!closure_of(out, topo, reach)) throw InvariantError("relation has a cycle");
  const auto kept = reduce(out, reach);
  EdgeSet result;
  for (std::size_t u = 0; u < kept.size(); ++u)
    for (std::size_t v : kept[u]) result.emplace(ids[u], ids[v]);
  return result;
}

namespace {

void record(Entailment e, const Rule& g, const Rule& s, CoverageGraph& graph, Warnings* warnings) {
  if (e == Entailment::Proved) {
    graph.add_coverage(g.id, s.id);
  } else if (e == Entailment::LimitExceeded && warnings) {
    warnings->push_back("derivation limit hit testing " + std::to_string(g.id) + " covers " +
                        std::to_string(s.id));
  }
}

CoverageMode mode_for(const Rule& specific, const CoverageConfig& cfg) {
  return specific.is_evidence() ? cfg.rule_evidence : cfg.rule_rule;
}

}  // namespace

CoverageGraph build_graph(std::span<const Rule> working, Deducer& deducer,
                          const CoverageConfig& cfg, std::vector<std::string> classes,
                          Warnings* warnings) {
  CoverageGraph g(std::move(classes));
  for (const auto& r : working) g.add_node(r);
  for (const auto& general : working) {
    if (general.is_evidence()) continue;
    for (const auto& specific : working) {
      if (general.id == specific.id) continue;
      record(deducer.covers(general, specific, mode_for(specific, cfg)), general, specific, g,
             warnings);
    }
  }
  return g;
}

void insert_rule(CoverageGraph& graph, Rule rule, Deducer& deducer, const CoverageConfig& cfg,
                 Warnings* warnings) {
  const RuleId id = rule.id;
  const std::vector<RuleId> existing = graph.node_ids();
  graph.add_node(std::move(rule));
  const Rule& fresh = graph.rule(id);
  for (RuleId other : existing) {
    const Rule& r = graph.rule(other);
    if (!r.is_evidence())
      record(deducer.covers(r, fresh, mode_for(fresh, cfg)), r, fresh, graph, warnings);
    if (!fresh.is_evidence())
      record(deducer.covers(fresh, r, mode_for(r, cfg)), fresh, r, graph, warnings);
  }
}

}  // namespace kbc
