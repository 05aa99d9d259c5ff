// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#include "kbc/rule.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string_view>
#include <unordered_map>
#include <utility>

#include "kbc/error.hpp"

namespace kbc {

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      detail_(message),
      line_(line),
      column_(column) {}

Term Term::variable(std::string name) {
  Term t;
  t.kind = Kind::Variable;
  t.name = std::move(name);
  return t;
}

Term Term::compound(std::string functor, std::vector<Term> args) {
  Term t;
  t.kind = Kind::Compound;
  t.name = std::move(functor);
  t.args = std::move(args);
  return t;
}

bool Term::is_ground() const {
  if (is_variable()) return false;
  return std::all_of(args.begin(), args.end(), [](const Term& a) { return a.is_ground(); });
}

bool Atom::is_ground() const {
  return std::all_of(args.begin(), args.end(), [](const Term& a) { return a.is_ground(); });
}

namespace {

struct StatsCollector {
  std::set<std::pair<std::string_view, std::size_t>> functors;
  std::set<std::string_view> variables;
  SignatureStats stats;

  void symbol(std::string_view name, std::size_t arity) {
    ++stats.n_functor_occ;
    functors.emplace(name, arity);
  }

  void term(const Term& t) {
    if (t.is_variable()) {
      ++stats.n_var_occ;
      variables.insert(t.name);
      return;
    }
    symbol(t.name, t.args.size());
    for (const auto& a : t.args) term(a);
  }

  void atom(const Atom& a) {
    symbol(a.predicate, a.args.size());
    for (const auto& t : a.args) term(t);
  }
};

void render_term_to(const Term& t, std::string& out) {
  out += t.name;
  if (t.is_variable() || t.args.empty()) return;
  out += '(';
  for (std::size_t i = 0; i < t.args.size(); ++i) {
    if (i) out += ',';
    render_term_to(t.args[i], out);
  }
  out += ')';
}

void render_atom_to(const Atom& a, std::string& out) {
  out += a.predicate;
  if (a.args.empty()) return;
  out += '(';
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ',';
    render_term_to(a.args[i], out);
  }
  out += ')';
}

class Renamer {
 public:
  void term(Term& t) {
    if (t.is_variable()) {
      auto [it, fresh] = names_.try_emplace(t.name, "");
      if (fresh) it->second = "V" + std::to_string(names_.size() - 1);
      t.name = it->second;
      return;
    }
    for (auto& a : t.args) term(a);
  }
  void atom(Atom& a) {
    for (auto& t : a.args) term(t);
  }

 private:
  std::unordered_map<std::string, std::string> names_;
};

}  // namespace

SignatureStats signature_stats(const Rule& rule) {
  StatsCollector c;
  c.atom(rule.head);
  for (const auto& a : rule.body) c.atom(a);
  c.stats.m_functor_distinct = c.functors.size();
  c.stats.m_var_distinct = c.variables.size();
  return c.stats;
}

double rule_length(const Rule& rule) {
  if (rule.length_override) return *rule.length_override;
  const auto s = signature_stats(rule);
  const double functor_bits =
      static_cast<double>(s.n_functor_occ) * std::log2(static_cast<double>(s.m_functor_distinct) + 1.0);
  const double variable_bits = static_cast<double>(s.n_var_occ) / 2.0 *
                               std::log2(static_cast<double>(s.m_var_distinct) + 1.0);
  return functor_bits + variable_bits;
}

std::string render_term(const Term& term) {
  std::string out;
  render_term_to(term, out);
  return out;
}

std::string render_atom(const Atom& atom) {
  std::string out;
  render_atom_to(atom, out);
  return out;
}

std::string render_rule(const Rule& rule) {
  std::string out;
  render_atom_to(rule.head, out);
  if (!rule.body.empty()) {
    out += " :- ";
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
      if (i) out += ", ";
      render_atom_to(rule.body[i], out);
    }
  }
  out += '.';
  return out;
}

std::string canonical_form(const Rule& rule) {
  Rule copy;
  copy.head = rule.head;
  copy.body = rule.body;
  Renamer r;
  r.atom(copy.head);
  for (auto& a : copy.body) r.atom(a);
  return render_rule(copy);
}

std::size_t term_depth(const Term& term) {
  std::size_t deepest = 0;
  for (const auto& a : term.args) deepest = std::max(deepest, term_depth(a));
  return 1 + deepest;
}

}  // namespace kbc
