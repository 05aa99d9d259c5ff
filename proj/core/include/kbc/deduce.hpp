// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kbc/rule.hpp"

namespace kbc {

/// Termination guards for forward chaining.
struct DeriveLimits {
  std::size_t max_depth = 10;       ///< chaining rounds
  std::size_t max_facts = 10000;    ///< facts in the closure
  std::size_t max_term_depth = 6;   ///< deepest argument term kept

  void validate() const;
};

enum class CoverageMode { Derivation, Subsumption };

std::string_view to_string(CoverageMode mode);
CoverageMode coverage_mode_from_string(std::string_view text);

/// Result of a bounded derivation. LimitExceeded means the answer is not
/// known; callers treat it as "not covered" and surface a warning.
enum class Entailment { Proved, NotProved, LimitExceeded };

/// Auxiliary rules available to the deductive engine (seed background plus
/// whatever has been consolidated). Immutable once constructed.
class Background {
 public:
  Background() = default;
  /// Throws kbc::Error if any rule carries an evidence class label.
  explicit Background(std::vector<Rule> rules);

  const std::vector<Rule>& rules() const { return rules_; }
  std::vector<const Rule*> with_head(std::string_view predicate, std::size_t arity) const;
  bool empty() const { return rules_.empty(); }

 private:
  std::vector<Rule> rules_;
};

/// True iff some substitution maps general's head onto specific's head and
/// each of general's body atoms onto an atom of specific's body.
bool theta_subsumes(const Rule& general, const Rule& specific);

/// Bounded forward chaining from bg plus `extra`. `goal` must be ground.
Entailment derives_goal(const Background& bg, std::span<const Rule> extra, const Atom& goal,
                        const DeriveLimits& limits = {});

/// Whether `general` covers `specific` modulo bg.
///
/// Subsumption mode is plain theta-subsumption. Derivation mode skolemizes
/// `specific`, asserts its body as facts and asks whether its head follows
/// with `general` applied as the last inference step.
Entailment covers(const Background& bg, const Rule& general, const Rule& specific,
                  CoverageMode mode, const DeriveLimits& limits = {});

/// Coverage oracle bound to one background. Saturates the background once
/// and answers many covers/derives queries against it. Not thread-safe;
/// use one instance per thread.
class Deducer {
 public:
  explicit Deducer(Background bg = {}, DeriveLimits limits = {});
  ~Deducer();
  Deducer(Deducer&&) noexcept;
  Deducer& operator=(Deducer&&) noexcept;

  const Background& background() const { return bg_; }
  const DeriveLimits& limits() const { return limits_; }

  /// Number of facts in the saturated background closure.
  std::size_t closure_size();
  /// True when saturating the background alone hit a limit.
  bool background_truncated();

  /// Appends rules to the background. A closure that is already saturated is
  /// extended in place rather than rebuilt; the result is the same unless a
  /// limit is hit along the way.
  void extend(std::span<const Rule> rules);

  Entailment derives(std::span<const Rule> extra, const Atom& goal);
  Entailment covers(const Rule& general, const Rule& specific, CoverageMode mode);

 private:
  struct Impl;

  Background bg_;
  DeriveLimits limits_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kbc
