// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

// Flat term encoding and the semi-naive forward chainer behind kbc::Deducer.
//
// Terms are stored in preorder as a sequence of cells. A non-negative cell is
// an interned (name, arity) symbol; its arguments follow it. A negative cell
// -(k + 1) is rule-local variable k. Facts are always ground.

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kbc/deduce.hpp"
#include "kbc/rule.hpp"

namespace kbc::detail {

using Cell = std::int32_t;

inline bool is_var(Cell c) { return c < 0; }
inline std::uint32_t var_index(Cell c) { return static_cast<std::uint32_t>(-(c + 1)); }
inline Cell make_var(std::uint32_t k) { return -static_cast<Cell>(k) - 1; }

class Symbols {
 public:
  Cell intern(std::string_view name, std::uint32_t arity);
  std::uint32_t arity(Cell c) const { return arity_[static_cast<std::size_t>(c)]; }
  const std::string& name(Cell c) const { return names_[static_cast<std::size_t>(c)]; }
  Cell skolem(std::uint32_t k);

 private:
  std::unordered_map<std::string, Cell> index_;
  std::vector<std::string> names_;
  std::vector<std::uint32_t> arity_;
  std::vector<Cell> skolems_;
};

struct CAtom {
  std::vector<Cell> cells;
  Cell predicate() const { return cells.front(); }
};

struct CRule {
  CAtom head;
  std::vector<CAtom> body;
  std::uint32_t num_vars = 0;
  bool range_restricted = true;
};

CRule compile_rule(const Rule& rule, Symbols& symbols);

/// Head and body of `rule` with every variable replaced by a skolem constant.
struct Skolemized {
  std::vector<Cell> head;
  std::vector<std::vector<Cell>> body;
};
Skolemized skolemize(const Rule& rule, Symbols& symbols);

std::vector<Cell> compile_ground(const Atom& atom, Symbols& symbols);

/// Number of cells spanned by the subterm starting at `cells`.
std::size_t subterm_size(const Symbols& symbols, const Cell* cells);

/// Deepest argument of an atom, with constants at depth 1.
std::size_t argument_depth(const Symbols& symbols, std::span<const Cell> atom);

class Bindings {
 public:
  struct Slot {
    const Cell* data = nullptr;
    std::uint32_t size = 0;
  };

  explicit Bindings(std::uint32_t num_vars) : slots_(num_vars) {}

  const Slot& operator[](std::uint32_t k) const { return slots_[k]; }
  void bind(std::uint32_t k, const Cell* data, std::uint32_t size) {
    slots_[k] = {data, size};
    trail_.push_back(k);
  }
  std::size_t mark() const { return trail_.size(); }
  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      slots_[trail_.back()] = {};
      trail_.pop_back();
    }
  }

 private:
  std::vector<Slot> slots_;
  std::vector<std::uint32_t> trail_;
};

/// One-sided matching of a (possibly non-ground) pattern against a ground
/// fact. Bindings made before a failure stay on the trail.
bool match(const Symbols& symbols, std::span<const Cell> pattern, const Cell* fact, Bindings& b);

/// Pattern with bound variables substituted. Returns false if a variable is
/// unbound.
bool instantiate(std::span<const Cell> pattern, const Bindings& b, std::vector<Cell>& out);

/// Over-approximation of unifiability: identical symbols wherever both
/// sides have a symbol, variables treated as wildcards.
bool compatible(const Symbols& symbols, std::span<const Cell> a, std::span<const Cell> b);

/// Ground facts indexed by predicate, optionally layered over a parent store
/// that is treated as read-only.
class FactStore {
 public:
  explicit FactStore(const FactStore* parent = nullptr) : parent_(parent) {}

  bool contains(std::span<const Cell> fact) const;
  bool insert(const Symbols& symbols, std::vector<Cell> fact);

  std::size_t own_size() const { return facts_.size(); }
  std::size_t total_size() const { return facts_.size() + (parent_ ? parent_->total_size() : 0); }
  const std::vector<Cell>& own_fact(std::uint32_t i) const { return facts_[i]; }

  template <typename F>
  bool for_each(Cell predicate, F&& f) const {
    if (parent_ && !parent_->for_each(predicate, f)) return false;
    auto it = by_predicate_.find(predicate);
    if (it == by_predicate_.end()) return true;
    for (std::uint32_t i : it->second)
      if (!f(facts_[i].data())) return false;
    return true;
  }

  /// Key for facts of `predicate` whose argument `position` is the ground
  /// term `arg`. Only the first kIndexedArgs positions are indexed.
  static constexpr std::size_t kIndexedArgs = 4;
  static std::uint64_t arg_key(Cell predicate, std::size_t position, std::span<const Cell> arg);

  std::size_t count_key(std::uint64_t key) const {
    auto it = by_arg_.find(key);
    const std::size_t own = it == by_arg_.end() ? 0 : it->second.size();
    return own + (parent_ ? parent_->count_key(key) : 0);
  }

  /// Visits facts filed under `key`. Hash collisions are possible, so the
  /// caller still has to match.
  template <typename F>
  bool for_each_key(std::uint64_t key, F&& f) const {
    if (parent_ && !parent_->for_each_key(key, f)) return false;
    auto it = by_arg_.find(key);
    if (it == by_arg_.end()) return true;
    for (std::uint32_t i : it->second)
      if (!f(facts_[i].data())) return false;
    return true;
  }

  /// Visits candidate facts for `pattern` under bindings `b`, using the most
  /// selective bound argument when there is one.
  template <typename F>
  bool for_candidates(const Symbols& symbols, std::span<const Cell> pattern, const Bindings& b,
                      F&& f) const;

 private:
  static std::uint64_t hash(std::span<const Cell> fact);
  bool contains_own(std::span<const Cell> fact, std::uint64_t h) const;

  const FactStore* parent_;
  std::vector<std::vector<Cell>> facts_;
  std::unordered_map<Cell, std::vector<std::uint32_t>> by_predicate_;
  std::unordered_multimap<std::uint64_t, std::uint32_t> by_hash_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_arg_;
};

template <typename F>
bool FactStore::for_candidates(const Symbols& symbols, std::span<const Cell> pattern,
                               const Bindings& b, F&& f) const {
  const Cell predicate = pattern.front();
  const std::uint32_t arity = symbols.arity(predicate);
  std::size_t at = 1;
  bool have = false;
  std::uint64_t best_key = 0;
  std::size_t best_count = 0;
  for (std::uint32_t pos = 0; pos < arity && pos < kIndexedArgs; ++pos) {
    const Cell c = pattern[at];
    std::span<const Cell> arg;
    std::size_t width = 1;
    if (is_var(c)) {
      const auto& slot = b[var_index(c)];
      if (slot.data) arg = {slot.data, slot.size};
    } else {
      width = subterm_size(symbols, pattern.data() + at);
      const auto sub = pattern.subspan(at, width);
      if (std::none_of(sub.begin(), sub.end(), is_var)) arg = sub;
    }
    at += width;
    if (arg.empty()) continue;
    const std::uint64_t key = arg_key(predicate, pos, arg);
    const std::size_t n = count_key(key);
    if (n == 0) return true;
    if (!have || n < best_count) {
      have = true;
      best_key = key;
      best_count = n;
    }
  }
  if (have) return for_each_key(best_key, f);
  return for_each(predicate, f);
}

enum class SaturationStatus { Fixpoint, Stopped, LimitExceeded };

/// Semi-naive forward chaining into `store`.
///
/// `settled` rules are assumed already closed over everything in the store
/// except `delta` (indices of the store's own facts); `fresh` rules are
/// evaluated against the whole store in the first round. `stop` is polled
/// after each round and ends the run early when it returns true.
SaturationStatus saturate(const Symbols& symbols, FactStore& store,
                          std::span<const CRule* const> settled,
                          std::span<const CRule* const> fresh,
                          std::vector<std::uint32_t> delta, const DeriveLimits& limits,
                          const std::function<bool()>& stop, bool* truncated);

/// True when `body` has a solution over `store` extending the bindings.
bool solve(const Symbols& symbols, const FactStore& store, std::span<const CAtom> body,
           Bindings& b);

/// True when `rule`'s head matches `goal` and its body is satisfiable in
/// `store`.
bool applies_at_root(const Symbols& symbols, const FactStore& store, const CRule& rule,
                     std::span<const Cell> goal);

}  // namespace kbc::detail
