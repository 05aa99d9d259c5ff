// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "kbc/rule.hpp"

namespace kbc {

struct ParseOptions {
  /// Id given to the first clause without an explicit `#id`.
  RuleId first_id = 1;
  /// Declared class set. A `#classes` directive in the text must agree
  /// with it when both are present.
  std::vector<std::string> classes;
};

struct Program {
  std::vector<Rule> rules;
  std::vector<std::string> classes;
  /// Per-rule residual support from `#residual` directives, in class order.
  std::map<RuleId, std::vector<double>> residuals;

  RuleId max_id() const;
};

/// Parses `.kbr` rule text.
///
/// Directives occupy a whole line: `#background`, `#candidates`,
/// `#evidence <class>`, `#classes <c1> <c2> ...`, and the per-clause
/// modifiers `#length <bits>`, `#id <n>`, `#protected`, `#residual <v>...`
/// that apply to the next clause only. `%` starts a comment.
Program parse_program(std::string_view text, const ParseOptions& options = {});

Program parse_file(const std::filesystem::path& path, const ParseOptions& options = {});

}  // namespace kbc
