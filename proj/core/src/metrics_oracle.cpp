// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

// Path-enumeration reference for compute_support. Deliberately shares no
// code with the propagation pass: it walks the reduced edge set directly.

#include <functional>
#include <set>

#include "kbc/error.hpp"
#include "kbc/metrics.hpp"

namespace kbc {

SupportTable brute_force_support(const CoverageGraph& graph, const LengthMap& lengths) {
  const auto ids = graph.node_ids();
  if (ids.size() > 12) throw Error("brute_force_support is capped at 12 nodes");
  const std::size_t k = graph.classes().size();

  std::map<RuleId, std::vector<RuleId>> parents;
  std::set<RuleId> has_child;
  for (RuleId id : ids) parents[id];
  for (const auto& [u, v] : graph.reduced_edges()) {
    parents[v].push_back(u);
    has_child.insert(u);
  }

  SupportTable table;
  table.classes = graph.classes();
  for (RuleId id : ids) table.values[id].assign(k, 0.0);

  // Every source of mass (labelled leaf length, residual anywhere) reaches
  // each node above it with the product of 1/|anc| over the hops taken.
  auto spread = [&](RuleId source, std::size_t cls, double mass) {
    std::function<void(RuleId, double)> walk = [&](RuleId node, double w) {
      table.values[node][cls] += mass * w;
      const auto& up = parents[node];
      for (RuleId p : up) walk(p, w / static_cast<double>(up.size()));
    };
    walk(source, 1.0);
  };

  for (RuleId id : ids) {
    const Rule& r = graph.rule(id);
    if (!has_child.count(id) && r.label) {
      auto it = lengths.find(id);
      spread(id, graph.class_index(*r.label), it == lengths.end() ? graph.length(id) : it->second);
    }
    const auto res = graph.residual(id);
    for (std::size_t c = 0; c < k; ++c)
      if (res[c] != 0) spread(id, c, res[c]);
  }
  return table;
}

}  // namespace kbc
