// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#include "engine.hpp"

#include <algorithm>
#include <cstring>

#include "kbc/error.hpp"

namespace kbc::detail {

Cell Symbols::intern(std::string_view name, std::uint32_t arity) {
  std::string key;
  key.reserve(name.size() + 4);
  key.append(name);
  key.push_back('/');
  key.append(std::to_string(arity));
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  const Cell id = static_cast<Cell>(names_.size());
  names_.emplace_back(name);
  arity_.push_back(arity);
  index_.emplace(std::move(key), id);
  return id;
}

Cell Symbols::skolem(std::uint32_t k) {
  while (skolems_.size() <= k) {
    skolems_.push_back(intern("$sk" + std::to_string(skolems_.size()), 0));
  }
  return skolems_[k];
}

namespace {

class RuleCompiler {
 public:
  explicit RuleCompiler(Symbols& symbols) : symbols_(symbols) {}

  void term(const Term& t, std::vector<Cell>& out) {
    if (t.is_variable()) {
      auto [it, fresh] = vars_.try_emplace(t.name, static_cast<std::uint32_t>(vars_.size()));
      out.push_back(make_var(it->second));
      return;
    }
    out.push_back(symbols_.intern(t.name, static_cast<std::uint32_t>(t.args.size())));
    for (const auto& a : t.args) term(a, out);
  }

  CAtom atom(const Atom& a) {
    CAtom c;
    c.cells.push_back(symbols_.intern(a.predicate, static_cast<std::uint32_t>(a.args.size())));
    for (const auto& t : a.args) term(t, c.cells);
    return c;
  }

  std::uint32_t num_vars() const { return static_cast<std::uint32_t>(vars_.size()); }

 private:
  Symbols& symbols_;
  std::unordered_map<std::string, std::uint32_t> vars_;
};

void collect_vars(std::span<const Cell> cells, std::vector<bool>& seen) {
  for (Cell c : cells)
    if (is_var(c)) seen[var_index(c)] = true;
}

}  // namespace

CRule compile_rule(const Rule& rule, Symbols& symbols) {
  RuleCompiler rc(symbols);
  CRule out;
  // Body first so that body variables get the low indices; the order is
  // irrelevant for correctness.
  out.head = rc.atom(rule.head);
  for (const auto& a : rule.body) out.body.push_back(rc.atom(a));
  out.num_vars = rc.num_vars();
  std::vector<bool> bound(out.num_vars, false);
  for (const auto& a : out.body) collect_vars(a.cells, bound);
  out.range_restricted = true;
  for (Cell c : out.head.cells)
    if (is_var(c) && !bound[var_index(c)]) out.range_restricted = false;
  return out;
}

Skolemized skolemize(const Rule& rule, Symbols& symbols) {
  const CRule c = compile_rule(rule, symbols);
  auto ground = [&](const CAtom& a) {
    std::vector<Cell> cells = a.cells;
    for (Cell& x : cells)
      if (is_var(x)) x = symbols.skolem(var_index(x));
    return cells;
  };
  Skolemized s;
  s.head = ground(c.head);
  for (const auto& a : c.body) s.body.push_back(ground(a));
  return s;
}

std::vector<Cell> compile_ground(const Atom& atom, Symbols& symbols) {
  if (!atom.is_ground()) throw Error("goal atom " + render_atom(atom) + " is not ground");
  RuleCompiler rc(symbols);
  return rc.atom(atom).cells;
}

std::size_t subterm_size(const Symbols& symbols, const Cell* cells) {
  std::size_t pending = 1;
  std::size_t n = 0;
  while (pending > 0) {
    const Cell c = cells[n++];
    --pending;
    if (!is_var(c)) pending += symbols.arity(c);
  }
  return n;
}

std::size_t argument_depth(const Symbols& symbols, std::span<const Cell> atom) {
  // Stack of remaining-children counts; depth of the root atom itself is 0.
  std::vector<std::uint32_t> remaining;
  std::size_t deepest = 0;
  remaining.push_back(symbols.arity(atom[0]));
  for (std::size_t i = 1; i < atom.size(); ++i) {
    while (!remaining.empty() && remaining.back() == 0) remaining.pop_back();
    --remaining.back();
    const std::size_t depth = remaining.size();
    deepest = std::max(deepest, depth);
    const Cell c = atom[i];
    const std::uint32_t k = is_var(c) ? 0 : symbols.arity(c);
    remaining.push_back(k);
  }
  return deepest;
}

bool match(const Symbols& symbols, std::span<const Cell> pattern, const Cell* fact, Bindings& b) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const Cell c = pattern[i];
    if (!is_var(c)) {
      if (fact[j] != c) return false;
      ++j;
      continue;
    }
    const std::uint32_t k = var_index(c);
    const auto size = static_cast<std::uint32_t>(subterm_size(symbols, fact + j));
    const auto& slot = b[k];
    if (slot.data) {
      if (slot.size != size || std::memcmp(slot.data, fact + j, size * sizeof(Cell)) != 0)
        return false;
    } else {
      b.bind(k, fact + j, size);
    }
    j += size;
  }
  return true;
}

bool instantiate(std::span<const Cell> pattern, const Bindings& b, std::vector<Cell>& out) {
  out.clear();
  for (Cell c : pattern) {
    if (!is_var(c)) {
      out.push_back(c);
      continue;
    }
    const auto& slot = b[var_index(c)];
    if (!slot.data) return false;
    out.insert(out.end(), slot.data, slot.data + slot.size);
  }
  return true;
}

bool compatible(const Symbols& symbols, std::span<const Cell> a, std::span<const Cell> b) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const Cell x = a[i];
    const Cell y = b[j];
    if (is_var(x) || is_var(y)) {
      i += subterm_size(symbols, a.data() + i);
      j += subterm_size(symbols, b.data() + j);
      continue;
    }
    if (x != y) return false;
    ++i;
    ++j;
  }
  return i == a.size() && j == b.size();
}

std::uint64_t FactStore::hash(std::span<const Cell> fact) {
  std::uint64_t h = 1469598103934665603ull;
  for (Cell c : fact) {
    h ^= static_cast<std::uint32_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

bool FactStore::contains_own(std::span<const Cell> fact, std::uint64_t h) const {
  auto [lo, hi] = by_hash_.equal_range(h);
  for (auto it = lo; it != hi; ++it) {
    const auto& f = facts_[it->second];
    if (f.size() == fact.size() && std::equal(f.begin(), f.end(), fact.begin())) return true;
  }
  return false;
}

bool FactStore::contains(std::span<const Cell> fact) const {
  const std::uint64_t h = hash(fact);
  for (const FactStore* s = this; s; s = s->parent_)
    if (s->contains_own(fact, h)) return true;
  return false;
}

std::uint64_t FactStore::arg_key(Cell predicate, std::size_t position,
                                 std::span<const Cell> arg) {
  std::uint64_t h = hash(arg);
  h ^= (static_cast<std::uint64_t>(static_cast<std::uint32_t>(predicate)) << 8) | position;
  h *= 0x9e3779b97f4a7c15ull;
  return h ^ (h >> 29);
}

bool FactStore::insert(const Symbols& symbols, std::vector<Cell> fact) {
  if (contains(fact)) return false;
  const auto idx = static_cast<std::uint32_t>(facts_.size());
  by_hash_.emplace(hash(fact), idx);
  by_predicate_[fact.front()].push_back(idx);
  const std::uint32_t arity = symbols.arity(fact.front());
  std::size_t at = 1;
  for (std::uint32_t pos = 0; pos < arity && pos < kIndexedArgs; ++pos) {
    const std::size_t width = subterm_size(symbols, fact.data() + at);
    const std::span<const Cell> arg(fact.data() + at, width);
    by_arg_[arg_key(fact.front(), pos, arg)].push_back(idx);
    at += width;
  }
  facts_.push_back(std::move(fact));
  return true;
}

namespace {

/// Body evaluation with an optional delta restriction on one atom.
class Join {
 public:
  Join(const Symbols& symbols, const FactStore& store, const CRule& rule,
       const std::unordered_map<Cell, std::vector<const Cell*>>* delta, std::size_t delta_pos)
      : symbols_(symbols), store_(store), rule_(rule), delta_(delta), delta_pos_(delta_pos),
        bindings_(rule.num_vars) {
    order_.reserve(rule.body.size());
    if (delta_) order_.push_back(delta_pos);
    for (std::size_t i = 0; i < rule.body.size(); ++i)
      if (!delta_ || i != delta_pos) order_.push_back(i);
  }

  template <typename Emit>
  void run(Emit&& emit) {
    step(0, emit);
  }

  Bindings& bindings() { return bindings_; }

 private:
  template <typename Emit>
  bool step(std::size_t k, Emit& emit) {
    if (k == order_.size()) return emit(bindings_);
    const std::size_t pos = order_[k];
    const CAtom& atom = rule_.body[pos];
    auto try_fact = [&](const Cell* fact) {
      const std::size_t m = bindings_.mark();
      bool keep_going = true;
      if (match(symbols_, atom.cells, fact, bindings_)) keep_going = step(k + 1, emit);
      bindings_.undo(m);
      return keep_going;
    };
    if (delta_ && pos == delta_pos_) {
      auto it = delta_->find(atom.predicate());
      if (it == delta_->end()) return true;
      for (const Cell* f : it->second)
        if (!try_fact(f)) return false;
      return true;
    }
    return store_.for_candidates(symbols_, atom.cells, bindings_, try_fact);
  }

  const Symbols& symbols_;
  const FactStore& store_;
  const CRule& rule_;
  const std::unordered_map<Cell, std::vector<const Cell*>>* delta_;
  std::size_t delta_pos_;
  std::vector<std::size_t> order_;
  Bindings bindings_;
};

}  // namespace

SaturationStatus saturate(const Symbols& symbols, FactStore& store,
                          std::span<const CRule* const> settled,
                          std::span<const CRule* const> fresh,
                          std::vector<std::uint32_t> delta, const DeriveLimits& limits,
                          const std::function<bool()>& stop, bool* truncated) {
  std::vector<Cell> head;
  std::vector<std::vector<Cell>> pending;
  bool first_round = true;
  for (std::size_t round = 0;; ++round) {
    if (stop && stop()) return SaturationStatus::Stopped;
    if (delta.empty() && !(first_round && !fresh.empty())) return SaturationStatus::Fixpoint;
    if (round >= limits.max_depth) return SaturationStatus::LimitExceeded;

    std::unordered_map<Cell, std::vector<const Cell*>> delta_index;
    for (std::uint32_t i : delta) {
      const auto& f = store.own_fact(i);
      delta_index[f.front()].push_back(f.data());
    }

    pending.clear();
    auto compact = [&] {
      std::sort(pending.begin(), pending.end());
      pending.erase(std::unique(pending.begin(), pending.end()), pending.end());
    };
    bool over_budget = false;
    auto emit_for = [&](const CRule& rule) {
      return [&](const Bindings& b) {
        if (!instantiate(rule.head.cells, b, head)) return true;
        if (argument_depth(symbols, head) > limits.max_term_depth) {
          if (truncated) *truncated = true;
          return true;
        }
        if (store.contains(head)) return true;
        pending.push_back(head);
        if (store.total_size() + pending.size() > limits.max_facts) {
          compact();
          if (store.total_size() + pending.size() > limits.max_facts) {
            over_budget = true;
            return false;
          }
        }
        return true;
      };
    };

    auto run_delta = [&](const CRule& rule) {
      if (!rule.range_restricted || rule.body.empty()) return;
      for (std::size_t pos = 0; pos < rule.body.size() && !over_budget; ++pos) {
        if (!delta_index.count(rule.body[pos].predicate())) continue;
        Join j(symbols, store, rule, &delta_index, pos);
        j.run(emit_for(rule));
      }
    };
    auto run_full = [&](const CRule& rule) {
      if (!rule.range_restricted || rule.body.empty()) return;
      Join j(symbols, store, rule, nullptr, 0);
      j.run(emit_for(rule));
    };

    const bool rules_are_new = first_round;
    first_round = false;
    for (const CRule* r : settled) {
      if (over_budget) break;
      run_delta(*r);
    }
    for (const CRule* r : fresh) {
      if (over_budget) break;
      if (rules_are_new) {
        run_full(*r);
      } else {
        run_delta(*r);
      }
    }
    if (over_budget) return SaturationStatus::LimitExceeded;

    // Deterministic commit order.
    compact();
    delta.clear();
    for (auto& f : pending) {
      const auto idx = static_cast<std::uint32_t>(store.own_size());
      if (store.insert(symbols, std::move(f))) delta.push_back(idx);
    }
  }
}

bool solve(const Symbols& symbols, const FactStore& store, std::span<const CAtom> body,
           Bindings& b) {
  if (body.empty()) return true;
  const CAtom& atom = body.front();
  bool found = false;
  store.for_candidates(symbols, atom.cells, b, [&](const Cell* fact) {
    const std::size_t m = b.mark();
    if (match(symbols, atom.cells, fact, b) && solve(symbols, store, body.subspan(1), b)) {
      found = true;
    }
    b.undo(m);
    return !found;
  });
  return found;
}

bool applies_at_root(const Symbols& symbols, const FactStore& store, const CRule& rule,
                     std::span<const Cell> goal) {
  Bindings b(rule.num_vars);
  if (!match(symbols, rule.head.cells, goal.data(), b)) return false;
  return solve(symbols, store, rule.body, b);
}

}  // namespace kbc::detail
