// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>

#include <fmt/format.h>

#include "kbc/error.hpp"
#include "kbc/harness.hpp"
#include "kbc/parser.hpp"

namespace kbc {

namespace {

std::string join_ids(const std::vector<RuleId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(ids[i]);
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double v) { return fmt::format("{:.6f}", v); }

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string steps_csv_header(const std::vector<std::string>& classes) {
  std::string out =
      "step,arrivals_examples,arrivals_rules,population_w,consolidated_count,avg_opt_w,"
      "avg_opt_cons,n_forgotten,forgotten_ids,promoted_ids,demoted_ids";
  for (const auto& c : classes) out += ",root_support_" + c;
  return out + ",warnings\n";
}

std::string steps_csv_row(const StepLog& log) {
  std::string out = fmt::format("{},{},{},{},{},{},{},{},{},{},{}", log.step,
                                log.arrivals_examples, log.arrivals_rules, log.population_w,
                                log.consolidated_count, num(log.avg_opt_w), num(log.avg_opt_cons),
                                log.forgotten.size(), join_ids(log.forgotten),
                                join_ids(log.promoted), join_ids(log.demoted));
  for (double s : log.root_support) out += "," + num(s);
  std::string warnings;
  for (std::size_t i = 0; i < log.warnings.size(); ++i) {
    if (i) warnings += ';';
    warnings += log.warnings[i];
  }
  return out + "," + csv_field(warnings) + "\n";
}

std::string metrics_csv(const CoverageGraph& graph, const MetricsTable& metrics) {
  std::string out = "id,class_label,L";
  for (const auto& c : graph.classes())
    out += fmt::format(",support_{0},lhat_{0},opt_{0}", c);
  out += ",opt_generic,perm_generic,protected\n";
  for (const auto& row : metrics.rows()) {
    out += fmt::format("{},{},{}", row.id, row.label.value_or(""), num(row.length));
    for (std::size_t c = 0; c < row.support.size(); ++c)
      out += fmt::format(",{},{},{}", num(row.support[c]), num(row.lhat[c]),
                         num(row.opt.per_class[c]));
    out += fmt::format(",{},{},{}\n", num(row.opt.generic), num(row.perm.generic),
                       row.is_protected ? 1 : 0);
  }
  return out;
}

std::string heatmap_csv(const GridResult& grid) {
  std::string out = "capacity,fraction,rule_canonical_form,count\n";
  for (const auto& r : grid.rows) {
    std::string quoted = "\"";
    for (char c : r.rule) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    out += fmt::format("{},{},{}\",{}\n", r.capacity, r.fraction, quoted, r.count);
  }
  return out;
}

std::string export_dot(const CoverageGraph& graph, const MetricsTable& metrics) {
  static constexpr std::array<const char*, 6> palette = {
      "palegreen", "lightcoral", "lightskyblue", "khaki", "plum", "lightgray"};
  std::string out = "digraph coverage {\n  rankdir=TB;\n  node [shape=box];\n";
  for (RuleId id : graph.node_ids()) {
    const Rule& r = graph.rule(id);
    std::string attrs = fmt::format("label=\"{}\\nopt={:.3f}\"", id,
                                    metrics.contains(id) ? metrics.at(id).opt.generic : 0.0);
    if (r.label) {
      const std::size_t c = graph.class_index(*r.label);
      attrs += fmt::format(", shape=ellipse, style=filled, fillcolor={}",
                           palette[std::min(c, palette.size() - 1)]);
    }
    if (r.is_protected) attrs += ", peripheries=2";
    attrs += fmt::format(", tooltip=\"{}\"", dot_escape(render_rule(r)));
    out += fmt::format("  n{} [{}];\n", id, attrs);
  }
  for (const auto& [u, v] : graph.reduced_edges()) out += fmt::format("  n{} -> n{};\n", u, v);
  return out + "}\n";
}

std::string snapshot(const KnowledgeBase& kb) {
  std::string out = "% knowledge-base snapshot\n#classes";
  for (const auto& c : kb.classes()) out += " " + c;
  out += "\n";
  auto modifiers = [&](const Rule& r) {
    out += fmt::format("#id {}\n", r.id);
    if (r.length_override) out += fmt::format("#length {}\n", *r.length_override);
  };
  if (!kb.seed_background().empty()) {
    out += "#background\n";
    for (const Rule& r : kb.seed_background()) {
      modifiers(r);
      out += render_rule(r) + "\n";
    }
  }
  const CoverageGraph& g = kb.graph();
  for (RuleId id : g.node_ids()) {
    const Rule& r = g.rule(id);
    out += r.label ? "#evidence " + *r.label + "\n" : "#candidates\n";
    modifiers(r);
    if (r.is_protected) out += "#protected\n";
    const auto res = g.residual(id);
    if (std::any_of(res.begin(), res.end(), [](double v) { return v != 0; })) {
      out += "#residual";
      for (double v : res) out += fmt::format(" {}", v);
      out += "\n";
    }
    out += render_rule(r) + "\n";
  }
  return out;
}

KnowledgeBase load_snapshot(std::string_view text, Policy policy) {
  Program prog = parse_program(text);
  std::vector<Rule> b0;
  std::vector<Rule> nodes;
  for (auto& r : prog.rules) (r.origin == Origin::Background ? b0 : nodes).push_back(std::move(r));
  KnowledgeBase kb(prog.classes, std::move(b0), std::move(policy));
  for (auto& r : nodes) {
    auto it = prog.residuals.find(r.id);
    kb.restore(std::move(r), it == prog.residuals.end() ? std::vector<double>{} : it->second);
  }
  return kb;
}

}  // namespace kbc
