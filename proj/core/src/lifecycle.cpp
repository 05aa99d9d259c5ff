// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#include "kbc/lifecycle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "kbc/error.hpp"

namespace kbc {

namespace {

std::string dedupe_key(const Rule& r) {
  std::string key = canonical_form(r);
  if (r.label) key += " @" + *r.label;
  return key;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0;
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

Threshold Threshold::parse(std::string_view text) {
  if (text == "avg_opt") return {Mode::AvgOpt, 0};
  if (text == "avg_opt_clamped") return {Mode::AvgOptClamped, 0};
  if (text.starts_with("fixed:")) {
    std::string v(text.substr(6));
    double value = 0;
    if (v == "-inf") {
      value = -std::numeric_limits<double>::infinity();
    } else if (v == "inf" || v == "+inf") {
      value = std::numeric_limits<double>::infinity();
    } else {
      std::size_t used = 0;
      try {
        value = std::stod(v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != v.size() || !std::isfinite(value))
        throw ConfigError("bad fixed threshold '" + v + "'");
    }
    return {Mode::Fixed, value};
  }
  throw ConfigError("unknown threshold mode '" + std::string(text) + "'");
}

std::string Threshold::to_string() const {
  switch (mode) {
    case Mode::AvgOpt: return "avg_opt";
    case Mode::AvgOptClamped: return "avg_opt_clamped";
    case Mode::Fixed: return fmt::format("fixed:{}", value);
  }
  return {};
}

double Threshold::evaluate(std::span<const double> opts) const {
  switch (mode) {
    case Mode::AvgOpt: return mean(opts);
    case Mode::AvgOptClamped: return std::max(0.0, mean(opts));
    case Mode::Fixed: return value;
  }
  return value;
}

void Policy::validate(std::span<const std::string> classes) const {
  if (!(beta >= 0 && beta <= 1)) throw ConfigError("beta must lie in [0, 1]");
  if (!(forget_fraction > 0 && forget_fraction <= 1))
    throw ConfigError("forget_fraction must lie in (0, 1]");
  if (consolidation_class &&
      std::find(classes.begin(), classes.end(), *consolidation_class) == classes.end())
    throw ConfigError("consolidation_class '" + *consolidation_class + "' is not a declared class");
  coverage.limits.validate();
}

KnowledgeBase::KnowledgeBase(std::vector<std::string> classes, std::vector<Rule> seed_background,
                             Policy policy)
    : policy_(std::move(policy)), b0_(std::move(seed_background)), graph_(std::move(classes)) {
  policy_.validate(graph_.classes());
  for (auto& r : b0_) {
    r.origin = Origin::Background;
    r.is_protected = true;
    b0_ids_.insert(r.id);
    forms_.insert(dedupe_key(r));
  }
  rebuild_deducer();
}

void KnowledgeBase::rebuild_deducer() {
  std::vector<Rule> bg = b0_;
  for (RuleId id : consolidation_order_) {
    Rule r = graph_.rule(id);
    r.origin = Origin::Background;
    bg.push_back(std::move(r));
  }
  deducer_ = Deducer(Background(std::move(bg)), policy_.coverage.limits);
}

void KnowledgeBase::extend_deducer(std::span<const RuleId> ids) {
  std::vector<Rule> added;
  for (RuleId id : ids) {
    Rule r = graph_.rule(id);
    r.origin = Origin::Background;
    added.push_back(std::move(r));
  }
  deducer_.extend(added);
}

const MetricsTable& KnowledgeBase::metrics() {
  if (!metrics_) metrics_ = compute_metrics(graph_, policy_.beta);
  return *metrics_;
}

std::vector<RuleId> KnowledgeBase::consolidated() const {
  return {consolidated_.begin(), consolidated_.end()};
}

IngestResult KnowledgeBase::ingest(std::span<const Rule> rules) {
  IngestResult out;
  for (const Rule& r : rules) {
    if (r.is_evidence() && !r.label) throw Error(fmt::format("evidence {} has no class", r.id));
    std::string key = dedupe_key(r);
    if (forms_.count(key)) {
      ++out.duplicates;
      continue;
    }
    if (graph_.contains(r.id) || b0_ids_.count(r.id))
      throw Error(fmt::format("rule id {} is already in use", r.id));
    Rule copy = r;
    copy.is_protected = false;
    if (copy.origin == Origin::Background) copy.origin = Origin::Candidate;
    insert_rule(graph_, std::move(copy), deducer_, policy_.coverage, &warnings_);
    if (auto it = arrival_residuals_.find(r.id); it != arrival_residuals_.end())
      graph_.set_residual(r.id, it->second);
    forms_.insert(std::move(key));
    out.inserted.push_back(r.id);
  }
  if (!out.inserted.empty()) metrics_.reset();
  return out;
}

void KnowledgeBase::restore(Rule rule, std::vector<double> residual) {
  const RuleId id = rule.id;
  const bool prot = rule.is_protected && !rule.is_evidence();
  rule.is_protected = false;
  const auto res = ingest(std::span<const Rule>(&rule, 1));
  if (res.inserted.empty()) return;
  if (!residual.empty()) graph_.set_residual(id, std::move(residual));
  if (prot) {
    graph_.set_protected(id, true);
    consolidated_.insert(id);
    consolidation_order_.push_back(id);
    extend_deducer(std::vector<RuleId>{id});
  }
  metrics_.reset();
}

std::vector<RuleId> KnowledgeBase::forget_step() {
  std::vector<RuleId> removed;
  if (policy_.capacity == 0) return removed;
  while (graph_.size() > policy_.capacity) {
    const MetricsTable& m = metrics();
    std::vector<const NodeMetrics*> candidates;
    for (const auto& row : m.rows())
      if (!row.is_protected) candidates.push_back(&row);
    if (candidates.empty()) {
      warnings_.push_back(fmt::format("OverCapacityStuck: population {} exceeds capacity {}",
                                      graph_.size(), policy_.capacity));
      break;
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto* a, const auto* b) {
      if (a->perm.generic != b->perm.generic) return a->perm.generic < b->perm.generic;
      if (a->length != b->length) return a->length > b->length;
      return a->id > b->id;
    });
    const auto quota = static_cast<std::size_t>(
        std::ceil(policy_.forget_fraction * static_cast<double>(graph_.size()) - 1e-12));
    const std::size_t n = std::min(std::max<std::size_t>(quota, 1), candidates.size());
    std::vector<RuleId> batch;
    for (std::size_t i = 0; i < n; ++i) batch.push_back(candidates[i]->id);
    for (RuleId id : batch) {
      forms_.erase(dedupe_key(graph_.rule(id)));
      graph_.remove_rule(id);
      removed.push_back(id);
    }
    metrics_.reset();
  }
  return removed;
}

double KnowledgeBase::threshold(const Threshold& t) {
  std::vector<double> opts;
  for (const auto& row : metrics().rows()) opts.push_back(row.opt.generic);
  return t.evaluate(opts);
}

std::vector<RuleId> KnowledgeBase::demote_pass() {
  std::vector<RuleId> out;
  if (consolidated_.empty()) return out;
  const double theta = threshold(policy_.theta_d);
  for (RuleId id : consolidated_)
    if (metrics().at(id).opt.generic < theta) out.push_back(id);
  if (out.empty()) return out;
  for (RuleId id : out) {
    consolidated_.erase(id);
    graph_.set_protected(id, false);
    std::erase(consolidation_order_, id);
  }
  rebuild_deducer();
  metrics_.reset();
  return out;
}

std::vector<RuleId> KnowledgeBase::promote_pass() {
  std::vector<RuleId> out;
  const double theta = threshold(policy_.theta_p);
  std::optional<std::size_t> cls;
  if (policy_.consolidation_class) cls = graph_.class_index(*policy_.consolidation_class);
  for (const auto& row : metrics().rows()) {
    if (row.is_protected) continue;
    if (graph_.rule(row.id).origin != Origin::Candidate) continue;
    if (!(row.opt.generic > theta)) continue;
    if (cls && row.opt.argmax != *cls) continue;
    out.push_back(row.id);
  }
  if (out.empty()) return out;
  for (RuleId id : out) {
    consolidated_.insert(id);
    consolidation_order_.push_back(id);
    graph_.set_protected(id, true);
  }
  extend_deducer(out);
  metrics_.reset();
  return out;
}

std::vector<double> KnowledgeBase::root_support() {
  const MetricsTable& m = metrics();
  std::vector<double> total(classes().size(), 0.0);
  for (RuleId id : graph_.roots()) {
    const auto& s = m.at(id).support;
    for (std::size_t c = 0; c < total.size(); ++c) total[c] += s[c];
  }
  return total;
}

std::vector<std::string> KnowledgeBase::take_warnings() {
  std::vector<std::string> out;
  out.swap(warnings_);
  return out;
}

StepLog KnowledgeBase::step(std::span<const Rule> arrivals) {
  StepLog log;
  log.step = ++steps_;
  for (const Rule& r : arrivals) (r.is_evidence() ? log.arrivals_examples : log.arrivals_rules)++;
  log.inserted = ingest(arrivals).inserted.size();
  metrics();
  log.forgotten = forget_step();
  log.demoted = demote_pass();
  log.promoted = promote_pass();

  const MetricsTable& m = metrics();
  log.population_w = graph_.size();
  log.consolidated_count = consolidated_.size();
  std::vector<double> all, cons;
  for (const auto& row : m.rows()) {
    all.push_back(row.opt.generic);
    if (consolidated_.count(row.id)) cons.push_back(row.opt.generic);
  }
  log.avg_opt_w = mean(all);
  log.avg_opt_cons = mean(cons);
  log.root_support = root_support();
  log.warnings = take_warnings();
  return log;
}

}  // namespace kbc
