// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kbc {

using RuleId = std::int64_t;

/// A first-order term: a variable or a compound (constants are compounds
/// with no arguments, integers are constants).
struct Term {
  enum class Kind : std::uint8_t { Variable, Compound };

  Kind kind = Kind::Compound;
  std::string name;
  std::vector<Term> args;

  static Term variable(std::string name);
  static Term compound(std::string functor, std::vector<Term> args = {});
  static Term constant(std::string name) { return compound(std::move(name)); }

  bool is_variable() const { return kind == Kind::Variable; }
  bool is_constant() const { return kind == Kind::Compound && args.empty(); }
  std::size_t arity() const { return args.size(); }
  bool is_ground() const;

  friend bool operator==(const Term&, const Term&) = default;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  std::size_t arity() const { return args.size(); }
  bool is_ground() const;

  friend bool operator==(const Atom&, const Atom&) = default;
};

enum class Origin : std::uint8_t { Evidence, Candidate, Background };

/// A clause. Evidence rules are labelled facts; candidates are unlabelled
/// generalizations; background rules feed the deductive engine.
struct Rule {
  RuleId id = 0;
  Atom head;
  std::vector<Atom> body;
  std::optional<std::string> label;
  std::optional<double> length_override;
  Origin origin = Origin::Candidate;
  bool is_protected = false;

  bool is_fact() const { return body.empty(); }
  bool is_evidence() const { return origin == Origin::Evidence; }
};

/// Occurrence and distinct-symbol counts used by the length encoder.
/// Predicates count as functor symbols; symbols are keyed by (name, arity).
struct SignatureStats {
  std::size_t n_functor_occ = 0;
  std::size_t m_functor_distinct = 0;
  std::size_t n_var_occ = 0;
  std::size_t m_var_distinct = 0;

  friend bool operator==(const SignatureStats&, const SignatureStats&) = default;
};

SignatureStats signature_stats(const Rule& rule);

/// Encoding length of a rule in bits. Returns the override when present,
/// otherwise n_f * log2(m_f + 1) + (n_v / 2) * log2(m_v + 1).
double rule_length(const Rule& rule);

std::string render_term(const Term& term);
std::string render_atom(const Atom& atom);

/// "head." or "head :- a1, a2." with no spaces inside argument lists.
std::string render_rule(const Rule& rule);

/// Rendering after renaming variables to V0, V1, ... in order of first
/// occurrence. Alpha-equivalent rules map to the same text.
std::string canonical_form(const Rule& rule);

/// Depth of a term: constants and variables are 1.
std::size_t term_depth(const Term& term);

}  // namespace kbc
