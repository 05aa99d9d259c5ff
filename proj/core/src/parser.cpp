// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#include "kbc/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "kbc/error.hpp"

namespace kbc {

RuleId Program::max_id() const {
  RuleId m = 0;
  for (const auto& r : rules) m = std::max(m, r.id);
  return m;
}

namespace {

bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_upper(char c) { return (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident(char c) { return is_lower(c) || is_upper(c) || is_digit(c); }

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) words.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return words;
}

std::optional<double> parse_decimal(const std::string& s) {
  double v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& options)
      : text_(text), next_id_(options.first_id) {
    out_.classes = options.classes;
  }

  Program run() {
    while (true) {
      skip_blank();
      if (at_end()) break;
      if (peek() == '#') {
        directive();
      } else {
        clause();
      }
    }
    if (pending_length_ || pending_id_ || pending_protected_ || pending_residual_)
      fail("directive not followed by a clause");
    return std::move(out_);
  }

 private:
  // --- lexing -------------------------------------------------------------

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_blank() {
    while (!at_end()) {
      const char c = peek();
      if (c == '%') {
        while (!at_end() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t line, std::size_t col) const {
    throw ParseError(msg, line, col);
  }

  void expect(char c) {
    skip_blank();
    if (peek() != c) {
      if (at_end()) fail(std::string("expected '") + c + "' but reached end of input");
      fail(std::string("expected '") + c + "' but found '" + peek() + "'");
    }
    advance();
  }

  std::string identifier() {
    std::string s;
    while (!at_end() && is_ident(peek())) {
      s += peek();
      advance();
    }
    return s;
  }

  // --- directives ---------------------------------------------------------

  void directive() {
    const std::size_t line = line_;
    const std::size_t col = col_;
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    std::string_view raw = text_.substr(pos_ + 1, end - pos_ - 1);
    if (auto pct = raw.find('%'); pct != std::string_view::npos) raw = raw.substr(0, pct);
    while (pos_ < end) advance();
    const auto words = split_words(raw);
    if (words.empty()) fail_at("empty directive", line, col);
    const std::string& name = words[0];
    auto arg_count = [&](std::size_t n) {
      if (words.size() != n + 1)
        fail_at("directive #" + name + " expects " + std::to_string(n) + " argument(s)", line, col);
    };

    if (name == "background") {
      arg_count(0);
      section_ = Origin::Background;
      label_.reset();
    } else if (name == "candidates") {
      arg_count(0);
      section_ = Origin::Candidate;
      label_.reset();
    } else if (name == "evidence") {
      arg_count(1);
      if (out_.classes.empty()) fail_at("#evidence before any #classes declaration", line, col);
      if (std::find(out_.classes.begin(), out_.classes.end(), words[1]) == out_.classes.end())
        fail_at("class label '" + words[1] + "' is not in the declared class set", line, col);
      section_ = Origin::Evidence;
      label_ = words[1];
    } else if (name == "classes") {
      if (words.size() < 2) fail_at("#classes needs at least one class", line, col);
      std::vector<std::string> declared(words.begin() + 1, words.end());
      std::set<std::string> uniq(declared.begin(), declared.end());
      if (uniq.size() != declared.size()) fail_at("duplicate class in #classes", line, col);
      if (saw_evidence_) fail_at("#classes must precede evidence", line, col);
      if (!out_.classes.empty() && out_.classes != declared)
        fail_at("#classes disagrees with the declared class set", line, col);
      out_.classes = std::move(declared);
    } else if (name == "length") {
      arg_count(1);
      auto v = parse_decimal(words[1]);
      if (!v || *v < 0) fail_at("#length needs a non-negative decimal", line, col);
      pending_length_ = v;
    } else if (name == "id") {
      arg_count(1);
      RuleId v = 0;
      const auto& w = words[1];
      auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
      if (ec != std::errc() || ptr != w.data() + w.size()) fail_at("#id needs an integer", line, col);
      pending_id_ = v;
    } else if (name == "protected") {
      arg_count(0);
      pending_protected_ = true;
    } else if (name == "residual") {
      std::vector<double> values;
      for (std::size_t i = 1; i < words.size(); ++i) {
        auto v = parse_decimal(words[i]);
        if (!v || *v < 0) fail_at("#residual needs non-negative decimals", line, col);
        values.push_back(*v);
      }
      if (values.size() != out_.classes.size())
        fail_at("#residual needs one value per declared class", line, col);
      pending_residual_ = std::move(values);
    } else {
      fail_at("unknown directive #" + name, line, col);
    }
  }

  // --- clauses ------------------------------------------------------------

  Term term() {
    skip_blank();
    const std::size_t line = line_;
    const std::size_t col = col_;
    const char c = peek();
    if (c == '$') fail("'$' is reserved for internal constants");
    if (is_upper(c)) return Term::variable(identifier());
    if (is_digit(c)) {
      std::string digits;
      while (!at_end() && is_digit(peek())) {
        digits += peek();
        advance();
      }
      if (!at_end() && is_ident(peek())) fail("malformed integer literal");
      skip_blank();
      if (peek() == '(') fail_at("integer constants cannot take arguments", line, col);
      return Term::constant(std::move(digits));
    }
    if (!is_lower(c)) {
      if (at_end()) fail("expected a term but reached end of input");
      fail(std::string("expected a term but found '") + c + "'");
    }
    std::string name = identifier();
    return Term::compound(std::move(name), arguments());
  }

  std::vector<Term> arguments() {
    std::vector<Term> args;
    skip_blank();
    if (peek() != '(') return args;
    advance();
    args.push_back(term());
    while (true) {
      skip_blank();
      if (peek() == ',') {
        advance();
        args.push_back(term());
      } else {
        expect(')');
        break;
      }
    }
    return args;
  }

  Atom atom() {
    skip_blank();
    const std::size_t line = line_;
    const std::size_t col = col_;
    const char c = peek();
    if (c == '$') fail("'$' is reserved for internal constants");
    if (!is_lower(c)) {
      if (at_end()) fail("expected an atom but reached end of input");
      fail(std::string("expected a predicate name but found '") + c + "'");
    }
    Atom a;
    a.predicate = identifier();
    a.args = arguments();
    auto [it, fresh] = arities_.try_emplace(a.predicate, a.args.size());
    if (!fresh && it->second != a.args.size())
      fail_at("predicate " + a.predicate + " used with arity " + std::to_string(a.args.size()) +
                  " but earlier with arity " + std::to_string(it->second),
              line, col);
    return a;
  }

  void clause() {
    const std::size_t line = line_;
    const std::size_t col = col_;
    Rule r;
    r.head = atom();
    skip_blank();
    if (peek() == ':') {
      advance();
      if (peek() != '-') fail("expected ':-'");
      advance();
      r.body.push_back(atom());
      while (true) {
        skip_blank();
        if (peek() != ',') break;
        advance();
        r.body.push_back(atom());
      }
    }
    expect('.');

    r.origin = section_;
    r.label = label_;
    if (section_ == Origin::Evidence) {
      saw_evidence_ = true;
      if (!r.body.empty()) fail_at("evidence must be a fact", line, col);
    }
    name_anonymous(r);
    r.length_override = pending_length_;
    r.is_protected = pending_protected_ || section_ == Origin::Background;
    if (pending_id_) {
      r.id = *pending_id_;
    } else {
      r.id = next_id_;
    }
    if (!ids_.insert(r.id).second) fail_at("duplicate rule id " + std::to_string(r.id), line, col);
    next_id_ = std::max(next_id_, r.id + 1);
    if (pending_residual_) out_.residuals[r.id] = std::move(*pending_residual_);
    pending_length_.reset();
    pending_id_.reset();
    pending_protected_ = false;
    pending_residual_.reset();
    out_.rules.push_back(std::move(r));
  }

  // Each bare `_` becomes a distinct variable.
  static void collect_names(const Term& t, std::set<std::string>& names) {
    if (t.is_variable()) names.insert(t.name);
    for (const auto& a : t.args) collect_names(a, names);
  }

  static void rename_anonymous(Term& t, std::set<std::string>& names, std::size_t& k) {
    if (t.is_variable() && t.name == "_") {
      std::string fresh;
      do {
        fresh = "_G" + std::to_string(k++);
      } while (names.count(fresh));
      names.insert(fresh);
      t.name = std::move(fresh);
    }
    for (auto& a : t.args) rename_anonymous(a, names, k);
  }

  static void name_anonymous(Rule& r) {
    std::set<std::string> names;
    for (const auto& t : r.head.args) collect_names(t, names);
    for (const auto& a : r.body)
      for (const auto& t : a.args) collect_names(t, names);
    if (!names.count("_")) return;
    std::size_t k = 0;
    for (auto& t : r.head.args) rename_anonymous(t, names, k);
    for (auto& a : r.body)
      for (auto& t : a.args) rename_anonymous(t, names, k);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;

  Program out_;
  bool saw_evidence_ = false;
  Origin section_ = Origin::Candidate;
  std::optional<std::string> label_;
  std::optional<double> pending_length_;
  std::optional<RuleId> pending_id_;
  bool pending_protected_ = false;
  std::optional<std::vector<double>> pending_residual_;
  RuleId next_id_;
  std::set<RuleId> ids_;
  std::unordered_map<std::string, std::size_t> arities_;
};

}  // namespace

Program parse_program(std::string_view text, const ParseOptions& options) {
  return Parser(text, options).run();
}

Program parse_file(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open rule file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_program(ss.str(), options);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.line(), e.column());
  }
}

}  // namespace kbc
