// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#include "kbc/deduce.hpp"

#include <algorithm>

#include "engine.hpp"
#include "kbc/error.hpp"

namespace kbc {

using detail::Cell;
using detail::CRule;
using detail::FactStore;
using detail::SaturationStatus;

void DeriveLimits::validate() const {
  if (max_depth == 0 || max_facts == 0 || max_term_depth == 0)
    throw ConfigError("derivation limits must be positive");
}

std::string_view to_string(CoverageMode mode) {
  return mode == CoverageMode::Derivation ? "derivation" : "subsumption";
}

CoverageMode coverage_mode_from_string(std::string_view text) {
  if (text == "derivation") return CoverageMode::Derivation;
  if (text == "subsumption") return CoverageMode::Subsumption;
  throw ConfigError("unknown coverage mode '" + std::string(text) + "'");
}

Background::Background(std::vector<Rule> rules) : rules_(std::move(rules)) {
  for (const auto& r : rules_)
    if (r.label) throw Error("background rule " + render_rule(r) + " carries a class label");
}

std::vector<const Rule*> Background::with_head(std::string_view predicate,
                                               std::size_t arity) const {
  std::vector<const Rule*> out;
  for (const auto& r : rules_)
    if (r.head.predicate == predicate && r.head.arity() == arity) out.push_back(&r);
  return out;
}

struct Deducer::Impl {
  detail::Symbols symbols;
  std::vector<CRule> rules;     // range-restricted clauses with a body
  std::vector<CRule> unsafe;    // clauses usable only at the root of a proof
  FactStore base;
  bool ready = false;
  bool truncated = false;

  void prepare(const Background& bg, const DeriveLimits& limits) {
    if (ready) return;
    ready = true;
    for (const auto& r : bg.rules()) {
      CRule c = detail::compile_rule(r, symbols);
      if (c.body.empty() && c.range_restricted) {
        base.insert(symbols, c.head.cells);
      } else if (c.range_restricted) {
        rules.push_back(std::move(c));
      } else {
        unsafe.push_back(std::move(c));
      }
    }
    std::vector<const CRule*> fresh;
    for (const auto& c : rules) fresh.push_back(&c);
    const auto status =
        detail::saturate(symbols, base, {}, fresh, {}, limits, nullptr, &truncated);
    if (status == SaturationStatus::LimitExceeded) truncated = true;
  }

  std::vector<const CRule*> settled() const {
    std::vector<const CRule*> out;
    out.reserve(rules.size());
    for (const auto& c : rules) out.push_back(&c);
    return out;
  }

  bool unsafe_root(const FactStore& store, std::span<const Cell> goal) const {
    for (const auto& c : unsafe)
      if (detail::applies_at_root(symbols, store, c, goal)) return true;
    return false;
  }

  // Could chaining from the new facts and the new rule ever produce a fact
  // usable by `general`'s body?
  bool needs_chaining(const CRule& general, const std::vector<std::vector<Cell>>& new_facts) const {
    std::vector<std::span<const Cell>> patterns;
    patterns.emplace_back(general.head.cells);
    for (const auto& f : new_facts) patterns.emplace_back(f);
    std::vector<const CRule*> pool;
    for (const auto& c : rules) pool.push_back(&c);
    pool.push_back(&general);
    std::vector<bool> fired(pool.size(), false);
    auto touches = [&](const CRule& r) {
      for (const auto& a : r.body)
        for (const auto& p : patterns)
          if (detail::compatible(symbols, a.cells, p)) return true;
      return false;
    };
    for (bool grew = true; grew;) {
      grew = false;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (fired[i] || !touches(*pool[i])) continue;
        fired[i] = true;
        patterns.emplace_back(pool[i]->head.cells);
        grew = true;
      }
    }
    return fired.back();
  }
};

Deducer::Deducer(Background bg, DeriveLimits limits)
    : bg_(std::move(bg)), limits_(limits), impl_(std::make_unique<Impl>()) {
  limits_.validate();
}

Deducer::~Deducer() = default;
Deducer::Deducer(Deducer&&) noexcept = default;
Deducer& Deducer::operator=(Deducer&&) noexcept = default;

std::size_t Deducer::closure_size() {
  impl_->prepare(bg_, limits_);
  return impl_->base.total_size();
}

bool Deducer::background_truncated() {
  impl_->prepare(bg_, limits_);
  return impl_->truncated;
}

void Deducer::extend(std::span<const Rule> rules) {
  std::vector<Rule> all = bg_.rules();
  all.insert(all.end(), rules.begin(), rules.end());
  bg_ = Background(std::move(all));
  auto& im = *impl_;
  if (!im.ready) return;

  std::vector<std::uint32_t> delta;
  std::vector<CRule> added;
  for (const auto& r : rules) {
    CRule c = detail::compile_rule(r, im.symbols);
    if (c.body.empty() && c.range_restricted) {
      const auto idx = static_cast<std::uint32_t>(im.base.own_size());
      if (im.base.insert(im.symbols, c.head.cells)) delta.push_back(idx);
    } else if (c.range_restricted) {
      added.push_back(std::move(c));
    } else {
      im.unsafe.push_back(std::move(c));
    }
  }
  std::vector<const CRule*> fresh;
  for (const auto& c : added) fresh.push_back(&c);
  const auto settled = im.settled();
  const auto status = detail::saturate(im.symbols, im.base, settled, fresh, std::move(delta),
                                       limits_, nullptr, &im.truncated);
  if (status == SaturationStatus::LimitExceeded) im.truncated = true;
  for (auto& c : added) im.rules.push_back(std::move(c));
}

Entailment Deducer::derives(std::span<const Rule> extra, const Atom& goal) {
  auto& im = *impl_;
  im.prepare(bg_, limits_);
  const std::vector<Cell> target = detail::compile_ground(goal, im.symbols);

  FactStore overlay(&im.base);
  std::vector<std::uint32_t> delta;
  std::vector<CRule> fresh_rules;
  std::vector<CRule> unsafe_extra;
  for (const auto& r : extra) {
    CRule c = detail::compile_rule(r, im.symbols);
    if (c.body.empty() && c.range_restricted) {
      const auto idx = static_cast<std::uint32_t>(overlay.own_size());
      if (overlay.insert(im.symbols, c.head.cells)) delta.push_back(idx);
    } else if (c.range_restricted) {
      fresh_rules.push_back(std::move(c));
    } else {
      unsafe_extra.push_back(std::move(c));
    }
  }
  std::vector<const CRule*> fresh;
  for (const auto& c : fresh_rules) fresh.push_back(&c);

  bool truncated = im.truncated;
  auto proved = [&] {
    if (overlay.contains(target) || im.unsafe_root(overlay, target)) return true;
    for (const auto& c : unsafe_extra)
      if (detail::applies_at_root(im.symbols, overlay, c, target)) return true;
    return false;
  };
  const auto status = detail::saturate(im.symbols, overlay, im.settled(), fresh, std::move(delta),
                                       limits_, proved, &truncated);
  if (status == SaturationStatus::Stopped || proved()) return Entailment::Proved;
  if (status == SaturationStatus::LimitExceeded || truncated) return Entailment::LimitExceeded;
  return Entailment::NotProved;
}

Entailment Deducer::covers(const Rule& general, const Rule& specific, CoverageMode mode) {
  auto& im = *impl_;
  const detail::Skolemized sk = detail::skolemize(specific, im.symbols);
  const CRule g = detail::compile_rule(general, im.symbols);

  if (mode == CoverageMode::Subsumption) {
    FactStore local;
    for (const auto& f : sk.body) local.insert(im.symbols, f);
    return detail::applies_at_root(im.symbols, local, g, sk.head) ? Entailment::Proved
                                                                  : Entailment::NotProved;
  }

  im.prepare(bg_, limits_);
  FactStore overlay(&im.base);
  std::vector<std::uint32_t> delta;
  for (const auto& f : sk.body) {
    const auto idx = static_cast<std::uint32_t>(overlay.own_size());
    if (overlay.insert(im.symbols, f)) delta.push_back(idx);
  }
  auto proved = [&] { return detail::applies_at_root(im.symbols, overlay, g, sk.head); };
  if (proved()) return Entailment::Proved;
  if (!im.needs_chaining(g, sk.body))
    return im.truncated ? Entailment::LimitExceeded : Entailment::NotProved;

  bool truncated = im.truncated;
  const CRule* fresh[] = {&g};
  const auto status = detail::saturate(im.symbols, overlay, im.settled(), fresh, std::move(delta),
                                       limits_, proved, &truncated);
  if (status == SaturationStatus::Stopped || proved()) return Entailment::Proved;
  if (status == SaturationStatus::LimitExceeded || truncated) return Entailment::LimitExceeded;
  return Entailment::NotProved;
}

bool theta_subsumes(const Rule& general, const Rule& specific) {
  Deducer d;
  return d.covers(general, specific, CoverageMode::Subsumption) == Entailment::Proved;
}

Entailment derives_goal(const Background& bg, std::span<const Rule> extra, const Atom& goal,
                        const DeriveLimits& limits) {
  Deducer d(bg, limits);
  return d.derives(extra, goal);
}

Entailment covers(const Background& bg, const Rule& general, const Rule& specific,
                  CoverageMode mode, const DeriveLimits& limits) {
  Deducer d(bg, limits);
  return d.covers(general, specific, mode);
}

}  // namespace kbc
